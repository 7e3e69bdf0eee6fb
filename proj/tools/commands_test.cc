#include "commands.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "crossfuse/errors.h"
#include "crossfuse/synth.h"

namespace crossfuse::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class CommandsTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("crossfuse_cli_" +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  std::string Corpus(std::size_t n = 80, std::size_t inconsistent = 10, int task = 2) {
    SynthConfig sc;
    sc.task = task;
    sc.num_consistent = n;
    sc.num_inconsistent = inconsistent;
    sc.image_dim = sc.text_dim = 8;
    sc.cue_dims = 2;
    const std::string path = Path("corpus.jsonl");
    SaveCorpus(path, GenerateSynthetic(sc), GetTask(task));
    return path;
  }

  std::string Config(const json& j) {
    const std::string path = Path("config.json");
    std::ofstream(path) << j.dump();
    return path;
  }

  int Run(std::vector<std::string> args) {
    args.insert(args.begin(), "crossfuse");
    out_.str("");
    err_.str("");
    return Main(args, out_, err_);
  }

  static std::string Slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST(VariantTest, ParseRoundTrip) {
  for (const char* name : {"full", "feature_fusion", "variant1", "variant2", "variant3",
                           "dual_cross", "dual_self", "dual_self_cross"}) {
    EXPECT_EQ(ToString(ParseVariant(name)), name);
  }
  EXPECT_THROW(ParseVariant("variant4"), ConfigError);
  EXPECT_TRUE(IsDual(Variant::kDualSelf));
  EXPECT_FALSE(IsDual(Variant::kVariant3));
}

TEST(ResolveTest, Precedence) {
  const json file = {{"dataset", "file.jsonl"},
                     {"seed", 3},
                     {"train", {{"learning_rate", 0.5}, {"max_epochs", 7}}},
                     {"model", {{"k", 12}}}};
  Overrides flags;
  flags.learning_rate = 0.25;
  const RunConfig c = ResolveRunConfig(file, flags);
  EXPECT_EQ(c.dataset, "file.jsonl");
  EXPECT_EQ(c.train.learning_rate, 0.25);  // flag beats file
  EXPECT_EQ(c.train.max_epochs, 7);        // file beats default
  EXPECT_EQ(c.train.batch_size, 32u);      // default
  EXPECT_EQ(c.model.fusion.k, 12u);
  EXPECT_EQ(c.train.seed, 3u);             // run seed drives training
}

TEST(ResolveTest, SettingDefaultsAndVariants) {
  Overrides flags;
  flags.setting = "D";
  flags.variant = "dual_self_cross";
  RunConfig c = ResolveRunConfig(json::object(), flags);
  EXPECT_EQ(c.train.sse_image.p0, 0.36);
  EXPECT_EQ(c.train.sse_text.p0, 0.27);
  EXPECT_EQ(c.model.kind, ModelKind::kDual);
  EXPECT_EQ(c.model.dual.variant, DualVariant::kSelfCross);

  flags = Overrides{};
  flags.variant = "feature_fusion";
  flags.p0_image = 0.4;
  c = ResolveRunConfig({{"train", {{"sse_text", {{"p0", 0.2}}}}}}, flags);
  EXPECT_EQ(c.model.fusion.attention_mode, AttentionMode::kNone);
  EXPECT_FALSE(c.model.fusion.self_attention_on_joint);
  EXPECT_EQ(c.train.sse_image.p0, 0.0);
  EXPECT_EQ(c.train.sse_text.p0, 0.0);

  flags.variant = "variant1";
  EXPECT_EQ(ResolveRunConfig(json::object(), flags).model.fusion.attention_mode,
            AttentionMode::kCo);
  flags.variant = "variant2";
  EXPECT_FALSE(ResolveRunConfig(json::object(), flags).model.fusion.self_attention_on_joint);
  flags.variant = "variant3";
  EXPECT_EQ(ResolveRunConfig(json::object(), flags).model.fusion.attention_mode,
            AttentionMode::kSelf);
}

TEST(ResolveTest, ValidateNamesTheField) {
  RunConfig c = ResolveRunConfig({{"dataset", "x"}}, {});
  c.variant = Variant::kDualCross;
  try {
    c.Validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("variant:", 0), 0u) << e.what();
  }
  c = ResolveRunConfig({{"dataset", "x"}, {"train", {{"batch_size", 0}}}}, {});
  try {
    c.Validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("train.", 0), 0u) << e.what();
  }
  EXPECT_THROW(ResolveRunConfig({{"setting", "Z"}}, {}), ConfigError);
  EXPECT_THROW(ResolveRunConfig({{"seed", "not a number"}}, {}), ConfigError);
}

TEST(AblationTest, RowsAndConfigs) {
  EXPECT_EQ(AblationRowNames(),
            (std::vector<std::string>{"full", "-self_attention", "-cross_attention",
                                      "-cross+co", "-cross+self", "-dropout", "-sse"}));
  RunConfig full = ResolveRunConfig({{"dataset", "x"}}, {});
  full.train.sse_image.p0 = 0.3;
  full.train.sse_text.p0 = 0.2;
  const RunConfig no_sse = AblationConfig(full, "-sse");
  EXPECT_EQ(no_sse.train.sse_image.p0, 0.0);
  EXPECT_EQ(no_sse.train.sse_text.p0, 0.0);
  EXPECT_EQ(nlohmann::json(no_sse.model).dump(), nlohmann::json(full.model).dump());
  EXPECT_EQ(AblationConfig(full, "-dropout").model.fusion.dropout_rate, 0.0);
  EXPECT_EQ(AblationConfig(full, "-cross+co").model.fusion.attention_mode, AttentionMode::kCo);
  EXPECT_THROW(AblationConfig(full, "-everything"), ConfigError);
}

TEST(AblationTest, SharedSeedSharesInitialWeights) {
  RunConfig full = ResolveRunConfig({{"dataset", "x"}, {"model", {{"image_dim", 8}, {"text_dim", 8}, {"k", 6}}}}, {});
  Model a(full.model);
  Model b(AblationConfig(full, "-self_attention").model);
  a.Init(full.seed);
  b.Init(full.seed);
  std::size_t shared = 0;
  for (Parameter* p : a.parameters()) {
    for (Parameter* q : b.parameters()) {
      if (p->name == q->name && p->value.shape() == q->value.shape()) {
        EXPECT_EQ(p->value, q->value) << p->name;
        ++shared;
      }
    }
  }
  EXPECT_GE(shared, 8u);
}

TEST(TransitionCsvTest, WorkedExampleAndRowSums) {
  crossfuse::Corpus c(3);
  const int labels[] = {0, 0, 1};
  for (int i = 0; i < 3; ++i) {
    c[i].id = "n" + std::to_string(i);
    c[i].label_image = c[i].label_text = labels[i];
  }
  std::ostringstream out;
  WriteTransitionCsv(out, c, false, {3.0, 0.5}, false);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "node,n0,n1,n2");
  std::getline(in, line);
  EXPECT_EQ(line, "n0,0.5,0.375,0.125");
  while (std::getline(in, line)) {
    std::istringstream cells(line);
    std::string cell;
    std::getline(cells, cell, ',');
    double sum = 0;
    while (std::getline(cells, cell, ',')) sum += std::stod(cell);
    EXPECT_NEAR(sum, 1.0, 1e-15);
  }
  std::ostringstream empty;
  WriteTransitionCsv(empty, {}, true, {900, 0.5}, false);
  EXPECT_EQ(empty.str(), "node\n");
}

TEST(GradCheckCommandTest, DefaultPassesAndFaultFails) {
  GradCheckConfig c;
  c.k = 10;
  EXPECT_TRUE(RunGradCheck(c).Passed(c.tolerance));
  c.inject_fault = true;
  const GradCheckReport r = RunGradCheck(c);
  EXPECT_FALSE(r.Passed(c.tolerance));
  EXPECT_FALSE(r.worst_param.empty());
}

TEST(ExperimentRecordTest, JsonRoundTrip) {
  ExperimentRecord r;
  r.config = {{"seed", 1}};
  r.heads = {"label"};
  const std::vector<int> y = {0, 1, 1};
  r.metrics = {ComputeMetrics(y, y, {"a", "b"})};
  r.history = {EpochRecord{0, 0.1, 1.5, 1.25, false}};
  r.best_epoch = 0;
  r.wall_clock_seconds = 0.5;
  r.version = "x";
  const ExperimentRecord back = nlohmann::json(r).get<ExperimentRecord>();
  EXPECT_EQ(back, r);
}

TEST_F(CommandsTest, TrainWritesArtifactsAndEvalReloads) {
  const std::string data = Corpus();
  const std::string cfg = Config({{"model", {{"k", 8}}}, {"train", {{"max_epochs", 3}}}});
  ASSERT_EQ(Run({"train", "--config", cfg, "--dataset", data, "--task", "2", "--out",
                 Path("run")}),
            kExitOk)
      << err_.str();
  for (const char* f : {"config.json", "metrics.json", "record.json", "model.ckpt"}) {
    EXPECT_TRUE(fs::exists(dir_ / "run" / f)) << f;
  }
  const json echoed = json::parse(Slurp(Path("run/config.json")));
  EXPECT_EQ(echoed.at("train").at("max_epochs"), 3);
  EXPECT_EQ(echoed.at("model").at("fusion").at("k"), 8);
  const json rec = json::parse(Slurp(Path("run/record.json")));
  EXPECT_EQ(rec.get<ExperimentRecord>(), rec.get<ExperimentRecord>());
  EXPECT_TRUE(rec.contains("wall_clock_seconds"));
  EXPECT_TRUE(rec.contains("version"));

  ASSERT_EQ(Run({"eval", "--checkpoint", Path("run/model.ckpt"), "--dataset", data,
                 "--out", Path("eval.json")}),
            kExitOk)
      << err_.str();
  const json ev = json::parse(Slurp(Path("eval.json")));
  EXPECT_EQ(ev.at("metrics").at(0).at("total"), 90);
}

TEST_F(CommandsTest, FeatureFusionEchoDisablesAttentionAndSse) {
  const std::string data = Corpus(60, 0);
  ASSERT_EQ(Run({"train", "--dataset", data, "--task", "2", "--variant", "feature_fusion",
                 "--epochs", "1", "--p0-image", "0.5", "--out", Path("ff")}),
            kExitOk)
      << err_.str();
  const json c = json::parse(Slurp(Path("ff/config.json")));
  EXPECT_EQ(c.at("model").at("fusion").at("attention_mode"), "none");
  EXPECT_EQ(c.at("model").at("fusion").at("self_attention_on_joint"), false);
  EXPECT_EQ(c.at("train").at("sse_image").at("p0"), 0.0);
  EXPECT_EQ(c.at("train").at("sse_text").at("p0"), 0.0);
}

TEST_F(CommandsTest, ExitCodes) {
  EXPECT_EQ(Run({"train"}), kExitConfig);  // missing dataset
  EXPECT_NE(err_.str().find("dataset"), std::string::npos);
  EXPECT_EQ(Run({"train", "--dataset", Path("missing.jsonl")}), kExitConfig);
  EXPECT_EQ(Run({"train", "--config", Path("missing.json")}), kExitConfig);
  EXPECT_EQ(Run({"frobnicate"}), kExitConfig);
  EXPECT_EQ(Run({}), kExitConfig);
  const std::string data = Corpus(60, 0);
  EXPECT_EQ(Run({"train", "--dataset", data, "--task", "2", "--variant", "dual_cross"}),
            kExitConfig);
  EXPECT_EQ(Run({"train", "--dataset", data, "--task", "2", "--setting", "C",
                 "--test-event", "event_0", "--train-events", "event_9"}),
            kExitConfig);
  EXPECT_EQ(Run({"train", "--dataset", data, "--task", "2", "--epochs", "2", "--lr", "1e200",
                 "--out", Path("boom")}),
            kExitTraining)
      << err_.str();
  EXPECT_NE(err_.str().find("epoch"), std::string::npos);
  EXPECT_EQ(Run({"gradcheck", "--k", "6"}), kExitOk);
  EXPECT_EQ(Run({"gradcheck", "--k", "6", "--inject-fault"}), kExitGradCheck);
  EXPECT_NE(err_.str().find("worst parameter"), std::string::npos);
}

TEST_F(CommandsTest, SseTableCommand) {
  const std::string path = Path("three.jsonl");
  {
    std::ofstream out(path);
    for (const char* l : {"informative", "informative", "not_informative"}) {
      out << json{{"id", std::string("s") + l}, {"image_vec", {1}}, {"text_vec", {1}},
                  {"label_image", l}, {"label_text", l}}
                 .dump()
          << "\n";
    }
  }
  ASSERT_EQ(Run({"sse-table", "--dataset", path, "--p0", "0.5", "--rho", "3"}), kExitOk)
      << err_.str();
  EXPECT_NE(out_.str().find(",0.5,0.375,0.125\n"), std::string::npos) << out_.str();
  std::ofstream(Path("empty.jsonl")).close();
  ASSERT_EQ(Run({"sse-table", "--dataset", Path("empty.jsonl"), "--out", Path("e.csv")}),
            kExitOk);
  EXPECT_EQ(Slurp(Path("e.csv")), "node\n");
  EXPECT_EQ(Run({"sse-table", "--dataset", path, "--p0", "2"}), kExitConfig);
}

TEST_F(CommandsTest, GenSynth) {
  ASSERT_EQ(Run({"gen-synth", "--out", Path("s.jsonl"), "--n", "25", "--inconsistent", "5",
                 "--task", "1"}),
            kExitOk);
  EXPECT_EQ(LoadCorpus(Path("s.jsonl"), GetTask(1)).size(), 30u);
}

}  // namespace
}  // namespace crossfuse::cli
