#include "commands.h"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "crossfuse/checkpoint.h"
#include "crossfuse/errors.h"
#include "crossfuse/synth.h"
#include "crossfuse/version.h"

namespace crossfuse::cli {
namespace {

using nlohmann::json;

json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config: '" + path + "' is not valid JSON: " + e.what());
  }
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("output_dir: cannot write '" + path.string() + "'");
  out << text;
}

void ApplyFlatModelKeys(const json& m, ModelSpec& spec) {
  auto both = [&](const char* key, auto& fusion_field, auto& dual_field) {
    if (m.contains(key)) {
      m.at(key).get_to(fusion_field);
      m.at(key).get_to(dual_field);
    }
  };
  both("image_dim", spec.fusion.image_dim, spec.dual.image_dim);
  both("text_dim", spec.fusion.text_dim, spec.dual.text_dim);
  both("k", spec.fusion.k, spec.dual.k);
  both("hidden", spec.fusion.hidden, spec.dual.hidden);
  both("dropout_rate", spec.fusion.dropout_rate, spec.dual.dropout_rate);
  if (m.contains("fuse_mode")) {
    spec.fusion.fuse_mode = ParseFuseMode(m.at("fuse_mode").get<std::string>());
  }
}

void ApplyVariant(RunConfig& c) {
  FusionConfig& f = c.model.fusion;
  c.model.kind = IsDual(c.variant) ? ModelKind::kDual : ModelKind::kFusion;
  switch (c.variant) {
    case Variant::kFull:
      f.attention_mode = AttentionMode::kCross;
      f.self_attention_on_joint = true;
      break;
    case Variant::kFeatureFusion:
      f.attention_mode = AttentionMode::kNone;
      f.self_attention_on_joint = false;
      c.train.sse_image.p0 = 0.0;
      c.train.sse_text.p0 = 0.0;
      break;
    case Variant::kVariant1:
      f.attention_mode = AttentionMode::kCo;
      f.self_attention_on_joint = true;
      break;
    case Variant::kVariant2:
      f.attention_mode = AttentionMode::kCross;
      f.self_attention_on_joint = false;
      break;
    case Variant::kVariant3:
      f.attention_mode = AttentionMode::kSelf;
      f.self_attention_on_joint = true;
      break;
    case Variant::kDualCross:
      c.model.dual.variant = DualVariant::kCross;
      break;
    case Variant::kDualSelf:
      c.model.dual.variant = DualVariant::kSelf;
      break;
    case Variant::kDualSelfCross:
      c.model.dual.variant = DualVariant::kSelfCross;
      break;
  }
}

std::vector<std::string> HeadNames(const ModelSpec& spec) {
  if (spec.kind == ModelKind::kDual) return {"image", "text"};
  return {"label"};
}

const TaskSpec& TaskOf(const RunConfig& c) { return GetTask(c.task); }

}  // namespace

std::string ToString(Variant v) {
  switch (v) {
    case Variant::kFull: return "full";
    case Variant::kFeatureFusion: return "feature_fusion";
    case Variant::kVariant1: return "variant1";
    case Variant::kVariant2: return "variant2";
    case Variant::kVariant3: return "variant3";
    case Variant::kDualCross: return "dual_cross";
    case Variant::kDualSelf: return "dual_self";
    case Variant::kDualSelfCross: return "dual_self_cross";
  }
  return "?";
}

Variant ParseVariant(const std::string& s) {
  for (Variant v : {Variant::kFull, Variant::kFeatureFusion, Variant::kVariant1,
                    Variant::kVariant2, Variant::kVariant3, Variant::kDualCross,
                    Variant::kDualSelf, Variant::kDualSelfCross}) {
    if (ToString(v) == s) return v;
  }
  throw ConfigError("variant: unknown value '" + s + "'");
}

bool IsDual(Variant v) {
  return v == Variant::kDualCross || v == Variant::kDualSelf ||
         v == Variant::kDualSelfCross;
}

void RunConfig::Validate() const {
  if (dataset.empty()) throw ConfigError("dataset: a dataset path is required");
  GetTask(task);
  if (IsDual(variant) && setting != Setting::kD) {
    throw ConfigError("variant: " + ToString(variant) + " requires setting D");
  }
  if (setting == Setting::kC) {
    if (test_event.empty()) throw ConfigError("splits.test_event: required for setting C");
    if (train_events.empty()) {
      throw ConfigError("splits.train_events: required for setting C");
    }
  }
  if (!(fractions.train > 0.0) || !(fractions.dev >= 0.0) ||
      !(fractions.test > 0.0)) {
    throw ConfigError("splits: train and test fractions must be positive");
  }
  if (output_dir.empty()) throw ConfigError("output_dir: must not be empty");
  try {
    train.Validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("train.") + e.what());
  }
  try {
    model.Validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("model.") + e.what());
  }
  if (model.num_classes() != GetTask(task).num_classes()) {
    throw ConfigError("model: num_classes does not match task " +
                      std::to_string(task));
  }
}

void to_json(json& j, const RunConfig& c) {
  j = json{{"dataset", c.dataset},
           {"task", c.task},
           {"setting", ToString(c.setting)},
           {"variant", ToString(c.variant)},
           {"output_dir", c.output_dir},
           {"seed", c.seed},
           {"splits",
            {{"train", c.fractions.train},
             {"dev", c.fractions.dev},
             {"test", c.fractions.test},
             {"test_fraction", c.test_fraction},
             {"test_event", c.test_event},
             {"train_events", c.train_events}}},
           {"train", c.train},
           {"model", c.model}};
}

RunConfig ResolveRunConfig(const json& file, const Overrides& flags) {
  RunConfig c;
  try {
    const std::string setting =
        flags.setting ? *flags.setting : file.value("setting", std::string("A"));
    c.setting = ParseSetting(setting);
    if (c.setting == Setting::kD) {
      c.train.sse_image = {900.0, 0.36};
      c.train.sse_text = {900.0, 0.27};
    }
    c.dataset = file.value("dataset", c.dataset);
    c.task = file.value("task", c.task);
    if (file.contains("variant")) c.variant = ParseVariant(file.at("variant").get<std::string>());
    c.output_dir = file.value("output_dir", c.output_dir);
    c.seed = file.value("seed", c.seed);
    if (file.contains("splits")) {
      const json& s = file.at("splits");
      c.fractions.train = s.value("train", c.fractions.train);
      c.fractions.dev = s.value("dev", c.fractions.dev);
      c.fractions.test = s.value("test", c.fractions.test);
      c.test_fraction = s.value("test_fraction", c.test_fraction);
      c.test_event = s.value("test_event", c.test_event);
      if (s.contains("train_events")) s.at("train_events").get_to(c.train_events);
    }
    if (file.contains("train")) from_json(file.at("train"), c.train);
    if (file.contains("model")) {
      from_json(file.at("model"), c.model);
      ApplyFlatModelKeys(file.at("model"), c.model);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (flags.dataset) c.dataset = *flags.dataset;
  if (flags.task) c.task = *flags.task;
  if (flags.variant) c.variant = ParseVariant(*flags.variant);
  if (flags.output_dir) c.output_dir = *flags.output_dir;
  if (flags.seed) c.seed = *flags.seed;
  if (flags.test_event) c.test_event = *flags.test_event;
  if (flags.train_events) c.train_events = *flags.train_events;
  if (flags.max_epochs) c.train.max_epochs = *flags.max_epochs;
  if (flags.learning_rate) c.train.learning_rate = *flags.learning_rate;
  if (flags.batch_size) c.train.batch_size = *flags.batch_size;
  if (flags.p0_image) c.train.sse_image.p0 = *flags.p0_image;
  if (flags.p0_text) c.train.sse_text.p0 = *flags.p0_text;
  if (flags.rho_image) c.train.sse_image.rho = *flags.rho_image;
  if (flags.rho_text) c.train.sse_text.rho = *flags.rho_text;
  ApplyVariant(c);
  c.train.seed = c.seed;
  if (c.task >= 1 && c.task <= 3) {
    c.model.fusion.num_classes = GetTask(c.task).num_classes();
    c.model.dual.num_classes = c.model.fusion.num_classes;
  }
  return c;
}

void FitModelToCorpus(RunConfig& config, const Corpus& corpus) {
  if (corpus.empty()) return;
  const Sample& s = corpus.front();
  if (!config.model.image_encoder && s.image_vec) {
    config.model.fusion.image_dim = config.model.dual.image_dim = s.image_vec->size();
  }
  if (!config.model.text_encoder && s.text_vec) {
    config.model.fusion.text_dim = config.model.dual.text_dim = s.text_vec->size();
  }
}

DatasetSplits MakeSplits(const RunConfig& config, const Corpus& corpus) {
  switch (config.setting) {
    case Setting::kA:
      return SplitSettingA(corpus, config.fractions, config.seed);
    case Setting::kB:
      return SplitSettingB(corpus,
                           SplitSettingA(corpus, config.fractions, config.seed));
    case Setting::kC:
      return SplitSettingC(corpus, config.test_event, config.train_events);
    case Setting::kD:
      return SplitSettingD(corpus, config.test_fraction, config.seed);
  }
  throw ConfigError("setting: unknown");
}

json ExperimentRecord::MetricsJson() const {
  return json{{"config", config},
              {"heads", heads},
              {"metrics", metrics},
              {"loss_history", history},
              {"best_epoch", best_epoch}};
}

void to_json(json& j, const ExperimentRecord& r) {
  j = r.MetricsJson();
  j["wall_clock_seconds"] = r.wall_clock_seconds;
  j["version"] = r.version;
}

void from_json(const json& j, ExperimentRecord& r) {
  r.config = j.at("config");
  j.at("heads").get_to(r.heads);
  j.at("metrics").get_to(r.metrics);
  j.at("loss_history").get_to(r.history);
  j.at("best_epoch").get_to(r.best_epoch);
  r.wall_clock_seconds = j.value("wall_clock_seconds", 0.0);
  r.version = j.value("version", std::string());
}

bool operator==(const ExperimentRecord& a, const ExperimentRecord& b) {
  return json(a) == json(b);
}

ExperimentRecord RunExperiment(RunConfig config, std::optional<Model>* trained) {
  if (config.dataset.empty()) throw ConfigError("dataset: a dataset path is required");
  if (!std::filesystem::exists(config.dataset)) {
    throw ConfigError("dataset: '" + config.dataset + "' does not exist");
  }
  const Corpus corpus = LoadCorpus(config.dataset, GetTask(config.task));
  return RunExperiment(std::move(config), corpus, trained);
}

ExperimentRecord RunExperiment(RunConfig config, const Corpus& corpus,
                               std::optional<Model>* trained) {
  const auto t0 = std::chrono::steady_clock::now();
  FitModelToCorpus(config, corpus);
  config.Validate();
  ValidateCorpus(corpus);
  const DatasetSplits splits = MakeSplits(config, corpus);
  Model model(config.model);
  model.Init(config.seed);
  const TrainResult result = Train(config.train, corpus, splits, model, TaskOf(config));
  ExperimentRecord rec;
  rec.config = config;
  rec.heads = HeadNames(config.model);
  rec.metrics = result.test;
  rec.history = result.history;
  rec.best_epoch = result.best_epoch;
  rec.version = Version();
  rec.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (trained) trained->emplace(std::move(model));
  return rec;
}

const std::vector<std::string>& AblationRowNames() {
  static const std::vector<std::string> names = {
      "full",           "-self_attention", "-cross_attention", "-cross+co",
      "-cross+self",    "-dropout",        "-sse"};
  return names;
}

RunConfig AblationConfig(const RunConfig& full, const std::string& row) {
  RunConfig c = full;
  FusionConfig& f = c.model.fusion;
  if (row == "full") {
  } else if (row == "-self_attention") {
    f.self_attention_on_joint = false;
  } else if (row == "-cross_attention") {
    f.attention_mode = AttentionMode::kNone;
  } else if (row == "-cross+co") {
    f.attention_mode = AttentionMode::kCo;
  } else if (row == "-cross+self") {
    f.attention_mode = AttentionMode::kSelf;
  } else if (row == "-dropout") {
    f.dropout_rate = 0.0;
  } else if (row == "-sse") {
    c.train.sse_image.p0 = 0.0;
    c.train.sse_text.p0 = 0.0;
  } else {
    throw ConfigError("ablation: unknown row '" + row + "'");
  }
  return c;
}

std::vector<AblationRow> RunAblation(const RunConfig& full) {
  if (full.variant != Variant::kFull) {
    throw ConfigError("variant: ablation starts from the full model");
  }
  if (!std::filesystem::exists(full.dataset)) {
    throw ConfigError("dataset: '" + full.dataset + "' does not exist");
  }
  const Corpus corpus = LoadCorpus(full.dataset, GetTask(full.task));
  std::vector<AblationRow> rows;
  for (const std::string& name : AblationRowNames()) {
    AblationRow row;
    row.name = name;
    row.config = AblationConfig(full, name);
    row.record = RunExperiment(row.config, corpus);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string AblationTable(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  out << "| model | accuracy | macro_f1 | weighted_f1 |\n";
  out << "|---|---|---|---|\n";
  out << std::fixed << std::setprecision(2);
  for (const AblationRow& r : rows) {
    out << "| " << r.name << " | ";
    if (r.record.metrics.empty()) {
      out << "- | - | - |\n";
      continue;
    }
    const MetricsReport& m = r.record.metrics.front();
    out << 100.0 * m.accuracy << " | " << 100.0 * m.macro_f1 << " | "
        << 100.0 * m.weighted_f1 << " |\n";
  }
  return out.str();
}

void WriteTransitionCsv(std::ostream& out, const Corpus& corpus,
                        bool text_modality, const SseParams& params,
                        bool force_text) {
  params.Validate();
  out << "node";
  for (const Sample& s : corpus) out << ',' << s.id;
  out << '\n';
  std::vector<int> li, lt;
  for (const Sample& s : corpus) {
    li.push_back(s.label_image);
    lt.push_back(s.label_text);
  }
  const KnowledgeGraph g(std::move(li), std::move(lt));
  char buf[32];
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto row = text_modality ? TextTransitionRow(g, i, params, force_text)
                                   : ImageTransitionRow(g, i, params);
    out << corpus[i].id;
    for (double p : row) {
      std::snprintf(buf, sizeof(buf), "%.17g", p);
      out << ',' << buf;
    }
    out << '\n';
  }
}

GradCheckReport RunGradCheck(const GradCheckConfig& config) {
  ModelSpec spec;
  spec.image_encoder = ImageEncoderConfig{8, 8, 3, 16};
  spec.text_encoder = TextEncoderConfig{64, 24};
  spec.augment = AugmentConfig{8, 8};
  const std::string& v = config.variant;
  if (v.rfind("dual_", 0) == 0) {
    spec.kind = ModelKind::kDual;
    spec.dual.variant = ParseDualVariant(v.substr(5));
    spec.dual.image_dim = 16;
    spec.dual.text_dim = 24;
    spec.dual.k = config.k;
    spec.dual.num_classes = config.num_classes;
  } else {
    FusionConfig& f = spec.fusion;
    f.image_dim = 16;
    f.text_dim = 24;
    f.k = config.k;
    f.num_classes = config.num_classes;
    if (v == "full") {
      f.attention_mode = AttentionMode::kCross;
    } else if (v == "add") {
      f.fuse_mode = FuseMode::kAdd;
    } else {
      f.attention_mode = ParseAttentionMode(v);
    }
  }
  Model model(spec);
  model.Init(config.seed);

  Rng rng(config.seed, 7);
  Sample s;
  s.id = "gradcheck";
  std::vector<double> px(8 * 8 * 3);
  for (double& p : px) p = rng.Uniform();
  s.image = ImageInput(8, 8, 3, std::move(px));
  s.text = NormalizeTweet("Flood waters rising near the bridge http://t.co/x help needed");
  std::vector<int> labels;
  for (std::size_t h = 0; h < model.num_heads(); ++h) {
    labels.push_back(static_cast<int>(rng.UniformIndex(config.num_classes)));
  }
  ModelGradCheckOptions opts;
  opts.seed = config.seed;
  opts.eps = config.eps;
  if (config.inject_fault) {
    opts.after_backward = [](std::span<Parameter* const> params) {
      params.back()->grad[0] += 1e-2;
    };
  }
  return CheckModelGradients(model, s, labels, opts);
}

namespace {

void AddTrainFlags(CLI::App* cmd, std::string& config_path, Overrides& o) {
  cmd->add_option("--config", config_path, "JSON run config");
  cmd->add_option_function<std::string>("--dataset", [&o](const std::string& v) { o.dataset = v; }, "JSONL dataset");
  cmd->add_option_function<int>("--task", [&o](const int& v) { o.task = v; }, "1, 2 or 3");
  cmd->add_option_function<std::string>("--setting", [&o](const std::string& v) { o.setting = v; }, "A, B, C or D");
  cmd->add_option_function<std::string>("--variant", [&o](const std::string& v) { o.variant = v; }, "model variant");
  cmd->add_option_function<std::string>("--out", [&o](const std::string& v) { o.output_dir = v; }, "output directory");
  cmd->add_option_function<std::uint64_t>("--seed", [&o](const std::uint64_t& v) { o.seed = v; }, "run seed");
  cmd->add_option_function<int>("--epochs", [&o](const int& v) { o.max_epochs = v; }, "max epochs");
  cmd->add_option_function<double>("--lr", [&o](const double& v) { o.learning_rate = v; }, "base learning rate");
  cmd->add_option_function<std::size_t>("--batch-size", [&o](const std::size_t& v) { o.batch_size = v; }, "batch size");
  cmd->add_option_function<double>("--p0-image", [&o](const double& v) { o.p0_image = v; }, "SSE p0, image");
  cmd->add_option_function<double>("--p0-text", [&o](const double& v) { o.p0_text = v; }, "SSE p0, text");
  cmd->add_option_function<double>("--rho-image", [&o](const double& v) { o.rho_image = v; }, "SSE rho, image");
  cmd->add_option_function<double>("--rho-text", [&o](const double& v) { o.rho_text = v; }, "SSE rho, text");
  cmd->add_option_function<std::string>("--test-event", [&o](const std::string& v) { o.test_event = v; }, "setting C test event");
  cmd->add_option_function<std::vector<std::string>>("--train-events", [&o](const std::vector<std::string>& v) { o.train_events = v; }, "setting C train events");
}

RunConfig LoadRunConfig(const std::string& path, const Overrides& o) {
  return ResolveRunConfig(path.empty() ? json::object() : ReadJsonFile(path), o);
}

int DoTrain(const RunConfig& config, std::ostream& out) {
  std::optional<Model> model;
  const ExperimentRecord rec = RunExperiment(config, &model);
  const std::filesystem::path dir = config.output_dir;
  std::filesystem::create_directories(dir);
  WriteText(dir / "config.json", rec.config.dump(2) + "\n");
  WriteText(dir / "metrics.json", rec.MetricsJson().dump(2) + "\n");
  WriteText(dir / "record.json", json(rec).dump(2) + "\n");
  json ckpt_model = {{"spec", model->spec()}, {"task", config.task}};
  SaveCheckpoint((dir / "model.ckpt").string(), ckpt_model, model->parameters());
  for (std::size_t h = 0; h < rec.metrics.size(); ++h) {
    const MetricsReport& m = rec.metrics[h];
    out << rec.heads[h] << ": accuracy " << m.accuracy << " macro_f1 "
        << m.macro_f1 << " weighted_f1 " << m.weighted_f1 << "\n";
  }
  out << "wrote " << dir.string() << "\n";
  return kExitOk;
}

int DoEval(const std::string& ckpt_path, const std::string& dataset,
           std::optional<int> task_flag, const std::string& out_path,
           std::ostream& out) {
  if (dataset.empty() || !std::filesystem::exists(dataset)) {
    throw ConfigError("dataset: '" + dataset + "' does not exist");
  }
  const Checkpoint ckpt = LoadCheckpoint(ckpt_path);
  ModelSpec spec;
  from_json(ckpt.model.at("spec"), spec);
  const int task_id = task_flag ? *task_flag : ckpt.model.value("task", 1);
  const TaskSpec& task = GetTask(task_id);
  Model model(spec);
  auto params = model.parameters();
  ApplyCheckpoint(ckpt, params);
  const Corpus corpus = LoadCorpus(dataset, task);
  std::vector<std::size_t> all(corpus.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto reports = Evaluate(model, corpus, all, task);
  const json j = {{"checkpoint", ckpt_path},
                  {"dataset", dataset},
                  {"task", task_id},
                  {"heads", HeadNames(spec)},
                  {"metrics", reports}};
  if (!out_path.empty()) WriteText(out_path, j.dump(2) + "\n");
  out << j.dump(2) << "\n";
  return kExitOk;
}

void PrintGradReport(const GradCheckReport& r, double tol, std::ostream& out) {
  out << std::left << std::setw(36) << "parameter" << std::setw(10) << "checked"
      << "max_rel_error\n";
  for (const ParamGradError& p : r.per_param) {
    out << std::left << std::setw(36) << p.name << std::setw(10) << p.checked
        << std::scientific << std::setprecision(3) << p.max_rel_error
        << std::defaultfloat << "\n";
  }
  out << (r.Passed(tol) ? "PASS" : "FAIL") << " max relative error "
      << std::scientific << std::setprecision(3) << r.max_rel_error
      << std::defaultfloat << " (worst " << r.worst_param << ", tolerance " << tol
      << ")\n";
}

}  // namespace

int Main(const std::vector<std::string>& args, std::ostream& out,
         std::ostream& err) {
  CLI::App app{"crossfuse: cross-attention multimodal fusion with SSE"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(Version()));

  std::string config_path;
  Overrides overrides;
  CLI::App* train = app.add_subcommand("train", "train and evaluate one model");
  AddTrainFlags(train, config_path, overrides);
  CLI::App* ablate = app.add_subcommand("ablate", "run the ablation rows");
  AddTrainFlags(ablate, config_path, overrides);

  std::string ckpt_path, eval_dataset, eval_out;
  std::optional<int> eval_task;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  eval->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
  eval->add_option("--dataset", eval_dataset, "JSONL dataset");
  eval->add_option_function<int>("--task", [&](const int& v) { eval_task = v; }, "task override");
  eval->add_option("--out", eval_out, "metrics JSON output");

  std::string sse_dataset, sse_modality = "image", sse_out;
  int sse_task = 1;
  SseParams sse_params{900.0, 0.5};
  bool force_text = false;
  CLI::App* sse = app.add_subcommand("sse-table", "dump an SSE transition table as CSV");
  sse->add_option("--dataset", sse_dataset, "JSONL dataset")->required();
  sse->add_option("--task", sse_task, "1, 2 or 3");
  sse->add_option("--modality", sse_modality, "image or text")
      ->check(CLI::IsMember({"image", "text"}));
  sse->add_option("--p0", sse_params.p0, "SSE p0");
  sse->add_option("--rho", sse_params.rho, "SSE rho");
  sse->add_flag("--force-text", force_text, "text rows with p0 = 1");
  sse->add_option("--out", sse_out, "CSV path (default stdout)");

  GradCheckConfig gc;
  CLI::App* grad = app.add_subcommand("gradcheck", "backprop vs finite differences");
  grad->add_option("--seed", gc.seed, "seed");
  grad->add_option("--classes", gc.num_classes, "number of classes");
  grad->add_option("--k", gc.k, "projection width K");
  grad->add_option("--variant", gc.variant,
                   "full|co|self|none|add|dual_cross|dual_self|dual_self_cross");
  grad->add_option("--tolerance", gc.tolerance, "max relative error");
  grad->add_option("--eps", gc.eps, "finite-difference step");
  grad->add_flag("--inject-fault", gc.inject_fault, "corrupt one gradient");

  SynthConfig sc;
  std::string synth_out;
  CLI::App* gen = app.add_subcommand("gen-synth", "write a synthetic JSONL corpus");
  gen->add_option("--out", synth_out, "output JSONL")->required();
  gen->add_option("--task", sc.task, "1, 2 or 3");
  gen->add_option("--n", sc.num_consistent, "consistent pairs");
  gen->add_option("--inconsistent", sc.num_inconsistent, "inconsistent pairs");
  gen->add_option("--misleading", sc.misleading_fraction, "misleading-modality fraction");
  gen->add_option("--noise", sc.noise, "per-coordinate noise");
  gen->add_option("--spread", sc.gain_spread, "log-uniform gain spread");
  gen->add_option("--gain", sc.misleading_gain, "misleading modality gain");
  gen->add_option("--cue", sc.cue, "cue shift");
  gen->add_option("--image-dim", sc.image_dim, "image vector length");
  gen->add_option("--text-dim", sc.text_dim, "text vector length");
  gen->add_option("--events", sc.num_events, "number of events");
  gen->add_flag("--raw", sc.raw, "inline images and raw text");
  gen->add_option("--seed", sc.seed, "seed");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (train->parsed()) {
      return DoTrain(LoadRunConfig(config_path, overrides), out);
    }
    if (ablate->parsed()) {
      const RunConfig full = LoadRunConfig(config_path, overrides);
      const auto rows = RunAblation(full);
      const std::filesystem::path dir = full.output_dir;
      std::filesystem::create_directories(dir);
      json j = json::array();
      for (const AblationRow& r : rows) {
        j.push_back({{"row", r.name}, {"record", r.record.MetricsJson()}});
      }
      WriteText(dir / "ablation.json", j.dump(2) + "\n");
      const std::string table = AblationTable(rows);
      WriteText(dir / "ablation.md", table);
      out << table;
      return kExitOk;
    }
    if (eval->parsed()) {
      return DoEval(ckpt_path, eval_dataset, eval_task, eval_out, out);
    }
    if (sse->parsed()) {
      if (!std::filesystem::exists(sse_dataset)) {
        throw ConfigError("dataset: '" + sse_dataset + "' does not exist");
      }
      const Corpus corpus = LoadCorpus(sse_dataset, GetTask(sse_task));
      const bool text = sse_modality == "text";
      if (sse_out.empty()) {
        WriteTransitionCsv(out, corpus, text, sse_params, force_text);
      } else {
        std::ofstream f(sse_out);
        if (!f) throw ConfigError("out: cannot write '" + sse_out + "'");
        WriteTransitionCsv(f, corpus, text, sse_params, force_text);
      }
      return kExitOk;
    }
    if (grad->parsed()) {
      const GradCheckReport r = RunGradCheck(gc);
      PrintGradReport(r, gc.tolerance, out);
      if (!r.Passed(gc.tolerance)) {
        err << "gradcheck failed: worst parameter " << r.worst_param
            << " relative error " << r.max_rel_error << "\n";
        return kExitGradCheck;
      }
      return kExitOk;
    }
    if (gen->parsed()) {
      const Corpus corpus = GenerateSynthetic(sc);
      SaveCorpus(synth_out, corpus, GetTask(sc.task));
      out << "wrote " << corpus.size() << " samples to " << synth_out << "\n";
      return kExitOk;
    }
  } catch (const TrainingError& e) {
    err << "training failed at epoch " << e.epoch() << ": " << e.what() << "\n";
    return kExitTraining;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ProtocolError& e) {
    err << "protocol error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const FormatError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "invalid argument: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitUsage;
}

}  // namespace crossfuse::cli
