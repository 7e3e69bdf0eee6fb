#include "crossfuse/trainer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "crossfuse/errors.h"
#include "crossfuse/ops.h"

namespace crossfuse {
namespace {

void CheckSse(const SseParams& p, const char* name) {
  if (!(p.p0 >= 0.0 && p.p0 <= 1.0)) {
    throw ConfigError(std::string(name) + ".p0 must be in [0, 1]");
  }
  if (!(p.rho >= kMinRho && p.rho <= kMaxRho)) {
    throw ConfigError(std::string(name) + ".rho must be in [10, 20000]");
  }
}

nlohmann::json SseJson(const SseParams& p) {
  return {{"rho", p.rho}, {"p0", p.p0}};
}

void SseFromJson(const nlohmann::json& j, SseParams& p) {
  p.rho = j.value("rho", p.rho);
  p.p0 = j.value("p0", p.p0);
}

double MeanLoss(const Model& model, const Corpus& corpus,
                const std::vector<std::size_t>& indices) {
  if (indices.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i : indices) {
    sum += model.Loss(corpus[i], GoldLabels(model, corpus[i]));
  }
  return sum / static_cast<double>(indices.size());
}

}  // namespace

void TrainConfig::Validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be positive");
  }
  if (!(lr_decay >= 1.0)) throw ConfigError("lr_decay must be >= 1");
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (max_decays < 0) throw ConfigError("max_decays must be >= 0");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) {
    throw ConfigError("holdout_fraction must be in (0, 1)");
  }
  CheckSse(sse_image, "sse_image");
  CheckSse(sse_text, "sse_text");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"learning_rate", c.learning_rate},
                     {"lr_decay", c.lr_decay},
                     {"patience", c.patience},
                     {"max_decays", c.max_decays},
                     {"batch_size", c.batch_size},
                     {"max_epochs", c.max_epochs},
                     {"seed", c.seed},
                     {"sse_image", SseJson(c.sse_image)},
                     {"sse_text", SseJson(c.sse_text)},
                     {"holdout_fraction", c.holdout_fraction}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.lr_decay = j.value("lr_decay", c.lr_decay);
  c.patience = j.value("patience", c.patience);
  c.max_decays = j.value("max_decays", c.max_decays);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.seed = j.value("seed", c.seed);
  if (j.contains("sse_image")) SseFromJson(j.at("sse_image"), c.sse_image);
  if (j.contains("sse_text")) SseFromJson(j.at("sse_text"), c.sse_text);
  c.holdout_fraction = j.value("holdout_fraction", c.holdout_fraction);
}

PlateauSchedule::PlateauSchedule(double lr, double decay, int patience,
                                 int max_decays)
    : lr_(lr),
      decay_(decay),
      patience_(patience),
      max_decays_(max_decays),
      best_(std::numeric_limits<double>::infinity()) {}

PlateauSchedule::Event PlateauSchedule::Observe(double dev_loss) {
  if (dev_loss < best_) {
    best_ = dev_loss;
    bad_epochs_ = 0;
    return Event::kImproved;
  }
  if (++bad_epochs_ < patience_) return Event::kNoChange;
  bad_epochs_ = 0;
  if (decays_ >= max_decays_) return Event::kStop;
  ++decays_;
  lr_ /= decay_;
  return Event::kDecayed;
}

void to_json(nlohmann::json& j, const EpochRecord& r) {
  j = nlohmann::json{{"epoch", r.epoch},
                     {"learning_rate", r.learning_rate},
                     {"train_loss", r.train_loss},
                     {"dev_loss", r.dev_loss},
                     {"decayed", r.decayed}};
}

void from_json(const nlohmann::json& j, EpochRecord& r) {
  j.at("epoch").get_to(r.epoch);
  j.at("learning_rate").get_to(r.learning_rate);
  j.at("train_loss").get_to(r.train_loss);
  j.at("dev_loss").get_to(r.dev_loss);
  j.at("decayed").get_to(r.decayed);
}

std::vector<int> GoldLabels(const Model& model, const Sample& s) {
  if (model.num_heads() == 2) return {s.label_image, s.label_text};
  return {s.label_image};
}

std::vector<MetricsReport> Evaluate(const Model& model, const Corpus& corpus,
                                    const std::vector<std::size_t>& indices,
                                    const TaskSpec& task) {
  const std::size_t heads = model.num_heads();
  std::vector<std::vector<int>> pred(heads), gold(heads);
  for (std::size_t i : indices) {
    const auto p = model.Predict(corpus[i]);
    const auto g = GoldLabels(model, corpus[i]);
    for (std::size_t h = 0; h < heads; ++h) {
      pred[h].push_back(p[h]);
      gold[h].push_back(g[h]);
    }
  }
  std::vector<MetricsReport> out;
  for (std::size_t h = 0; h < heads; ++h) {
    out.push_back(ComputeMetrics(pred[h], gold[h], task.classes));
  }
  return out;
}

TrainResult Train(const TrainConfig& config, const Corpus& corpus,
                  const DatasetSplits& splits, Model& model,
                  const TaskSpec& task) {
  config.Validate();
  if (model.spec().num_classes() != task.num_classes()) {
    throw ConfigError("model has " + std::to_string(model.spec().num_classes()) +
                      " classes but task " + task.name + " has " +
                      std::to_string(task.num_classes()));
  }
  std::vector<std::size_t> train = splits.train;
  TrainResult result;
  result.dev_used = splits.dev;
  if (result.dev_used.empty() && !train.empty()) {
    Holdout h = HoldoutSplit(train, config.holdout_fraction, config.seed);
    train = std::move(h.fit);
    result.dev_used = std::move(h.holdout);
  }
  if (train.empty()) throw ConfigError("training split is empty");

  // Graph nodes are positions in `train`.
  std::vector<int> li, lt;
  std::vector<bool> forced(train.size(), false);
  {
    std::vector<std::size_t> sorted_forced = splits.forced_text;
    std::sort(sorted_forced.begin(), sorted_forced.end());
    for (std::size_t n = 0; n < train.size(); ++n) {
      li.push_back(corpus[train[n]].label_image);
      lt.push_back(corpus[train[n]].label_text);
      forced[n] = std::binary_search(sorted_forced.begin(), sorted_forced.end(),
                                     train[n]);
    }
  }
  const KnowledgeGraph graph(std::move(li), std::move(lt));
  const bool dual = model.num_heads() == 2;

  auto params = model.parameters();
  for (Parameter* p : params) p->ZeroGrad();
  PlateauSchedule schedule(config.learning_rate, config.lr_decay,
                           config.patience, config.max_decays);
  std::vector<Tensor> best = model.Snapshot();
  const Rng root(config.seed);
  std::vector<std::size_t> order(train.size());

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng epoch_rng = root.Derive(static_cast<std::uint64_t>(epoch));
    epoch_rng.Shuffle(order);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.learning_rate = schedule.lr();
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t node = order[b];
        // Separate streams keep the dropout draws independent of SSE, so a
        // run with p0 = 0 matches a run without SSE exactly.
        const Rng sample_rng = epoch_rng.Derive(node + 1);
        Rng sse_rng = sample_rng.Derive(0);
        Rng model_rng = sample_rng.Derive(1);
        const SseDraw draw = ApplySse(node, graph, config.sse_image,
                                      config.sse_text, sse_rng, forced[node]);
        const Sample& img = corpus[train[draw.image_source]];
        const Sample& txt = corpus[train[draw.text_source]];
        std::vector<int> labels = {draw.label};
        if (dual) labels = {img.label_image, txt.label_text};
        const double loss = model.Accumulate(img, txt, labels, scale, model_rng);
        if (!std::isfinite(loss)) {
          throw TrainingError("non-finite training loss at epoch " +
                                  std::to_string(epoch),
                              epoch);
        }
        loss_sum += loss;
      }
      SgdStep(params, schedule.lr());
    }
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.dev_loss = MeanLoss(model, corpus, result.dev_used);
    if (!std::isfinite(rec.dev_loss)) {
      throw TrainingError("non-finite dev loss at epoch " + std::to_string(epoch),
                          epoch);
    }
    const auto event = schedule.Observe(rec.dev_loss);
    if (event == PlateauSchedule::Event::kImproved) {
      best = model.Snapshot();
      result.best_epoch = epoch;
      result.best_dev_loss = rec.dev_loss;
    }
    rec.decayed = event == PlateauSchedule::Event::kDecayed;
    result.history.push_back(rec);
    if (event == PlateauSchedule::Event::kStop) break;
  }
  model.Restore(best);
  if (!splits.test.empty()) {
    result.test = Evaluate(model, corpus, splits.test, task);
  }
  return result;
}

std::vector<TrainConfig> SseGrid(const TrainConfig& base,
                                 const std::vector<double>& rho_image,
                                 const std::vector<double>& p0_image,
                                 const std::vector<double>& rho_text,
                                 const std::vector<double>& p0_text) {
  auto or_base = [](const std::vector<double>& v, double b) {
    return v.empty() ? std::vector<double>{b} : v;
  };
  std::vector<TrainConfig> out;
  for (double ri : or_base(rho_image, base.sse_image.rho)) {
    for (double pi : or_base(p0_image, base.sse_image.p0)) {
      for (double rt : or_base(rho_text, base.sse_text.rho)) {
        for (double pt : or_base(p0_text, base.sse_text.p0)) {
          TrainConfig c = base;
          c.sse_image = {ri, pi};
          c.sse_text = {rt, pt};
          out.push_back(c);
        }
      }
    }
  }
  return out;
}

TuneResult Tune(const std::vector<TrainConfig>& candidates, const Corpus& corpus,
                const DatasetSplits& splits, const ModelFactory& factory,
                const TaskSpec& task, TuneProtocol protocol) {
  if (candidates.empty()) throw ConfigError("tuning grid is empty");
  for (const TrainConfig& c : candidates) c.Validate();
  TuneResult result;
  double best_score = -1.0;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const TrainConfig& c = candidates[k];
    DatasetSplits inner = splits;
    std::vector<std::size_t> scored = splits.dev;
    if (protocol == TuneProtocol::kFifteenPercent || scored.empty()) {
      Holdout h = HoldoutSplit(splits.train, c.holdout_fraction, c.seed);
      inner.train = std::move(h.fit);
      inner.dev = h.holdout;
      scored = std::move(h.holdout);
    }
    inner.test.clear();
    if (scored.empty()) throw ConfigError("tuning selection set is empty");
    Model model = factory(c);
    Train(c, corpus, inner, model, task);
    const double score = Evaluate(model, corpus, scored, task)[0].accuracy;
    result.scores.push_back(score);
    if (score > best_score) {
      best_score = score;
      result.best_index = k;
    }
  }
  result.best = candidates[result.best_index];
  return result;
}

}  // namespace crossfuse
