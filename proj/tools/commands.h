#ifndef CROSSFUSE_TOOLS_COMMANDS_H_
#define CROSSFUSE_TOOLS_COMMANDS_H_

// Command implementations behind the crossfuse binary. Kept in a library so
// tests can drive them without spawning processes.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crossfuse/dataset.h"
#include "crossfuse/metrics.h"
#include "crossfuse/model.h"
#include "crossfuse/splits.h"
#include "crossfuse/trainer.h"

namespace crossfuse::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitConfig = 2,
  kExitTraining = 3,
  kExitGradCheck = 4,
};

enum class Variant {
  kFull,
  kFeatureFusion,
  kVariant1,  // cross-attention replaced by co-attention
  kVariant2,  // no self-attention on the joint vector
  kVariant3,  // cross-attention replaced by self gates
  kDualCross,
  kDualSelf,
  kDualSelfCross,
};

std::string ToString(Variant v);
Variant ParseVariant(const std::string& s);
bool IsDual(Variant v);

struct RunConfig {
  std::string dataset;
  int task = 1;
  Setting setting = Setting::kA;
  Variant variant = Variant::kFull;
  std::string output_dir = "crossfuse_out";
  std::uint64_t seed = 0;
  SplitFractions fractions;
  double test_fraction = kSettingDTestFraction;  // setting D
  std::string test_event;                        // setting C
  std::vector<std::string> train_events;         // setting C
  TrainConfig train;
  ModelSpec model;

  // Field-level ConfigError.
  void Validate() const;
};

void to_json(nlohmann::json& j, const RunConfig& c);

// Command-line values that take precedence over the config file.
struct Overrides {
  std::optional<std::string> dataset, setting, variant, output_dir, test_event;
  std::optional<int> task, max_epochs;
  std::optional<std::uint64_t> seed;
  std::optional<double> learning_rate, p0_image, p0_text, rho_image, rho_text;
  std::optional<std::size_t> batch_size;
  std::optional<std::vector<std::string>> train_events;
};

// defaults < setting defaults < file < flags; then the variant is applied
// (feature_fusion also zeroes both SSE probabilities) and the run seed is
// copied into the training config.
RunConfig ResolveRunConfig(const nlohmann::json& file, const Overrides& flags);

// Reads precomputed vector lengths into the model dims for modalities that
// have no encoder. Throws ConfigError on an explicit mismatch.
void FitModelToCorpus(RunConfig& config, const Corpus& corpus);

DatasetSplits MakeSplits(const RunConfig& config, const Corpus& corpus);

struct ExperimentRecord {
  nlohmann::json config;
  std::vector<std::string> heads;
  std::vector<MetricsReport> metrics;
  std::vector<EpochRecord> history;
  int best_epoch = -1;
  double wall_clock_seconds = 0.0;
  std::string version;

  // The deterministic part (no wall clock, no version).
  nlohmann::json MetricsJson() const;
};

void to_json(nlohmann::json& j, const ExperimentRecord& r);
void from_json(const nlohmann::json& j, ExperimentRecord& r);
bool operator==(const ExperimentRecord& a, const ExperimentRecord& b);

// Loads, splits, trains and evaluates. The trained model is returned through
// `trained` when given.
ExperimentRecord RunExperiment(RunConfig config, std::optional<Model>* trained = nullptr);
// As above on an already loaded corpus.
ExperimentRecord RunExperiment(RunConfig config, const Corpus& corpus,
                               std::optional<Model>* trained = nullptr);

struct AblationRow {
  std::string name;
  RunConfig config;
  ExperimentRecord record;
};

// Row names in output order.
const std::vector<std::string>& AblationRowNames();
// The config of one ablation row derived from the full-model config.
RunConfig AblationConfig(const RunConfig& full, const std::string& row);
std::vector<AblationRow> RunAblation(const RunConfig& full);
std::string AblationTable(const std::vector<AblationRow>& rows);

// One line per node: id, then probabilities. An empty corpus yields the
// header only.
void WriteTransitionCsv(std::ostream& out, const Corpus& corpus,
                        bool text_modality, const SseParams& params,
                        bool force_text);

struct GradCheckConfig {
  std::uint64_t seed = 0;
  std::size_t num_classes = 3;
  std::size_t k = 100;
  std::string variant = "full";
  double tolerance = 1e-4;
  double eps = 1e-5;
  bool inject_fault = false;  // corrupts one backward gradient
};

// Random mini-model with toy encoders on one random raw example.
GradCheckReport RunGradCheck(const GradCheckConfig& config);

// Full argument vector including the program name; returns the exit code.
int Main(const std::vector<std::string>& args, std::ostream& out,
         std::ostream& err);

}  // namespace crossfuse::cli

#endif  // CROSSFUSE_TOOLS_COMMANDS_H_
