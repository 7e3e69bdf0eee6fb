#ifndef CROSSFUSE_TRAINER_H_
#define CROSSFUSE_TRAINER_H_

// Mini-batch SGD with per-sample SSE, dev-loss plateau decay and best-dev
// model selection.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "crossfuse/dataset.h"
#include "crossfuse/metrics.h"
#include "crossfuse/model.h"
#include "crossfuse/splits.h"
#include "crossfuse/sse.h"
#include "crossfuse/task.h"

namespace crossfuse {

inline constexpr double kMinRho = 10.0;
inline constexpr double kMaxRho = 20000.0;

struct TrainConfig {
  double learning_rate = 2e-3;
  double lr_decay = 10.0;
  int patience = 3;
  int max_decays = 2;
  std::size_t batch_size = 32;
  int max_epochs = 50;
  std::uint64_t seed = 0;
  SseParams sse_image;
  SseParams sse_text;
  // Fraction of train held out as the dev set when a split has none.
  double holdout_fraction = 0.15;

  // Throws ConfigError; rho must lie in [10, 20000] and p0 in [0, 1].
  void Validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

// Learning-rate policy: after `patience` consecutive epochs without a strict
// dev-loss improvement the rate is divided by `decay`; once `max_decays`
// decays have happened the next plateau stops training.
class PlateauSchedule {
 public:
  PlateauSchedule(double lr, double decay, int patience, int max_decays);

  enum class Event { kImproved, kNoChange, kDecayed, kStop };
  Event Observe(double dev_loss);

  double lr() const { return lr_; }
  int decays() const { return decays_; }
  double best() const { return best_; }

 private:
  double lr_;
  double decay_;
  int patience_;
  int max_decays_;
  int decays_ = 0;
  int bad_epochs_ = 0;
  double best_;
};

struct EpochRecord {
  int epoch = 0;
  double learning_rate = 0.0;
  double train_loss = 0.0;  // mean over the epoch's training examples
  double dev_loss = 0.0;    // mean evaluation-mode loss over dev
  bool decayed = false;
};

void to_json(nlohmann::json& j, const EpochRecord& r);
void from_json(const nlohmann::json& j, EpochRecord& r);

struct TrainResult {
  std::vector<EpochRecord> history;
  int best_epoch = -1;
  double best_dev_loss = 0.0;
  // One report per head on the test split (empty when there is no test set).
  std::vector<MetricsReport> test;
  std::vector<std::size_t> dev_used;  // corpus indices scored as dev
};

// Gold labels of sample s for each head of `model`.
std::vector<int> GoldLabels(const Model& model, const Sample& s);

// Per-head metrics of `model` on corpus[indices].
std::vector<MetricsReport> Evaluate(const Model& model, const Corpus& corpus,
                                    const std::vector<std::size_t>& indices,
                                    const TaskSpec& task);

// Trains `model` in place (it must already be initialized) and leaves it at
// the best-dev epoch. With an empty dev split, a holdout_fraction of train
// is carved off as dev. Throws TrainingError on a non-finite loss.
TrainResult Train(const TrainConfig& config, const Corpus& corpus,
                  const DatasetSplits& splits, Model& model,
                  const TaskSpec& task);

enum class TuneProtocol { kDev, kFifteenPercent };

struct TuneResult {
  std::size_t best_index = 0;
  TrainConfig best;
  std::vector<double> scores;  // selection accuracy per candidate
};

using ModelFactory = std::function<Model(const TrainConfig&)>;

// Cartesian grid over SSE parameters in row-major order (rho_image, p0_image,
// rho_text, p0_text); empty lists keep the base value.
std::vector<TrainConfig> SseGrid(const TrainConfig& base,
                                 const std::vector<double>& rho_image,
                                 const std::vector<double>& p0_image,
                                 const std::vector<double>& rho_text,
                                 const std::vector<double>& p0_text);

// Trains each candidate and selects by accuracy (first head) on dev, or on a
// 15% holdout of train for kFifteenPercent. Ties keep the earlier candidate.
TuneResult Tune(const std::vector<TrainConfig>& candidates, const Corpus& corpus,
                const DatasetSplits& splits, const ModelFactory& factory,
                const TaskSpec& task, TuneProtocol protocol);

}  // namespace crossfuse

#endif  // CROSSFUSE_TRAINER_H_
