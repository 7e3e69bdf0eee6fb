// End-to-end runs of the crossfuse binary as a separate process.

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Result {
  int code = -1;
  std::string out;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("crossfuse_it_" +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  // Runs the binary with stderr folded into the captured output.
  static Result Run(const std::string& args) {
    const std::string cmd = std::string(CROSSFUSE_BIN) + " " + args + " 2>&1";
    Result r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
  }

  static std::string Slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  std::string Synth(const std::string& extra = "") {
    const std::string path = Path("synth.jsonl");
    const Result r = Run("gen-synth --out " + path +
                         " --task 2 --n 150 --inconsistent 30 --image-dim 12 --text-dim 12 "
                         "--cue 2 --seed 4 " + extra);
    EXPECT_EQ(r.code, 0) << r.out;
    return path;
  }

  fs::path dir_;
};

TEST_F(CliTest, GenerateTrainEvaluate) {
  const std::string data = Synth();
  Result r = Run("train --dataset " + data +
                 " --task 2 --setting B --epochs 4 --p0-image 0.2 --p0-text 0.2 --out " +
                 Path("run"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("macro_f1"), std::string::npos);
  const json record = json::parse(Slurp(Path("run/record.json")));
  EXPECT_EQ(record.at("config").at("setting"), "B");
  EXPECT_LE(record.at("loss_history").size(), 4u);

  r = Run("eval --checkpoint " + Path("run/model.ckpt") + " --dataset " + data);
  ASSERT_EQ(r.code, 0) << r.out;
  const json eval = json::parse(r.out);
  EXPECT_EQ(eval.at("metrics").at(0).at("total"), 180);
}

TEST_F(CliTest, RepeatedRunsGiveIdenticalMetrics) {
  const std::string data = Synth();
  const std::string flags = " --dataset " + data + " --task 2 --epochs 3 --seed 11 --out ";
  ASSERT_EQ(Run("train" + flags + Path("run")).code, 0);
  const std::string metrics = Slurp(Path("run/metrics.json"));
  const std::string config = Slurp(Path("run/config.json"));
  EXPECT_FALSE(metrics.empty());
  ASSERT_EQ(Run("train" + flags + Path("run")).code, 0);
  EXPECT_EQ(Slurp(Path("run/metrics.json")), metrics);
  EXPECT_EQ(Slurp(Path("run/config.json")), config);
}

TEST_F(CliTest, ConfigFileAndFlagPrecedence) {
  const std::string data = Synth();
  {
    std::ofstream(Path("cfg.json")) << json{{"dataset", data},
                                            {"task", 2},
                                            {"seed", 5},
                                            {"train", {{"max_epochs", 2}, {"learning_rate", 0.5}}},
                                            {"model", {{"k", 9}}}}
                                           .dump();
  }
  const Result r = Run("train --config " + Path("cfg.json") + " --lr 0.03 --out " + Path("p"));
  ASSERT_EQ(r.code, 0) << r.out;
  const json c = json::parse(Slurp(Path("p/config.json")));
  EXPECT_EQ(c.at("train").at("learning_rate"), 0.03);
  EXPECT_EQ(c.at("train").at("max_epochs"), 2);
  EXPECT_EQ(c.at("seed"), 5);
  EXPECT_EQ(c.at("model").at("fusion").at("k"), 9);
  EXPECT_EQ(c.at("train").at("batch_size"), 32);
}

TEST_F(CliTest, FeatureFusionEcho) {
  const std::string data = Synth();
  ASSERT_EQ(Run("train --dataset " + data + " --task 2 --variant feature_fusion --epochs 1 "
                "--p0-text 0.3 --out " + Path("ff")).code,
            0);
  const json c = json::parse(Slurp(Path("ff/config.json")));
  EXPECT_EQ(c.at("model").at("fusion").at("attention_mode"), "none");
  EXPECT_FALSE(c.at("model").at("fusion").at("self_attention_on_joint").get<bool>());
  EXPECT_EQ(c.at("train").at("sse_text").at("p0"), 0.0);
}

TEST_F(CliTest, AblationRowsAndTable) {
  const std::string data = Synth();
  const Result r = Run("ablate --dataset " + data +
                       " --task 2 --epochs 2 --p0-image 0.2 --p0-text 0.2 --out " + Path("abl"));
  ASSERT_EQ(r.code, 0) << r.out;
  const json rows = json::parse(Slurp(Path("abl/ablation.json")));
  const std::vector<std::string> names = {"full", "-self_attention", "-cross_attention",
                                          "-cross+co", "-cross+self", "-dropout", "-sse"};
  ASSERT_EQ(rows.size(), names.size());
  for (std::size_t i = 0; i < names.size(); ++i) EXPECT_EQ(rows[i].at("row"), names[i]);
  const std::string table = Slurp(Path("abl/ablation.md"));
  for (const auto& n : names) EXPECT_NE(table.find(n), std::string::npos) << n;

  // "-sse" is the full model at p0 = 0.
  const Result plain = Run("train --dataset " + data +
                           " --task 2 --epochs 2 --p0-image 0 --p0-text 0 --out " + Path("p0"));
  ASSERT_EQ(plain.code, 0) << plain.out;
  const json p0 = json::parse(Slurp(Path("p0/metrics.json")));
  EXPECT_EQ(rows[6].at("record").at("metrics"), p0.at("metrics"));
}

TEST_F(CliTest, SseTable) {
  const std::string data = Synth();
  Result r = Run("sse-table --dataset " + data + " --task 2 --p0 0.4 --rho 900 --out " +
                 Path("t.csv"));
  ASSERT_EQ(r.code, 0) << r.out;
  std::ifstream in(Path("t.csv"));
  std::string line;
  std::getline(in, line);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    std::istringstream cells(line);
    std::string cell;
    std::getline(cells, cell, ',');
    double sum = 0;
    while (std::getline(cells, cell, ',')) sum += std::stod(cell);
    EXPECT_NEAR(sum, 1.0, 1e-12);
    ++rows;
  }
  EXPECT_EQ(rows, 180u);

  std::ofstream(Path("empty.jsonl")).close();
  r = Run("sse-table --dataset " + Path("empty.jsonl") + " --out " + Path("e.csv"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(Slurp(Path("e.csv")), "node\n");
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(Run("train").code, 2);
  EXPECT_EQ(Run("train --dataset " + Path("nope.jsonl")).code, 2);
  EXPECT_EQ(Run("train --bogus-flag").code, 2);
  const std::string data = Synth();
  EXPECT_EQ(Run("train --dataset " + data + " --task 2 --variant dual_self").code, 2);
  const Result boom =
      Run("train --dataset " + data + " --task 2 --epochs 2 --lr 1e200 --out " + Path("b"));
  EXPECT_EQ(boom.code, 3) << boom.out;
  const Result ok = Run("gradcheck --k 8");
  EXPECT_EQ(ok.code, 0) << ok.out;
  EXPECT_NE(ok.out.find("PASS"), std::string::npos);
  const Result bad = Run("gradcheck --k 8 --inject-fault");
  EXPECT_EQ(bad.code, 4) << bad.out;
  EXPECT_NE(bad.out.find("FAIL"), std::string::npos);
}

TEST_F(CliTest, DualHeadSettingD) {
  const std::string data = Synth();
  const Result r = Run("train --dataset " + data +
                       " --task 2 --setting D --variant dual_self_cross --epochs 2 --out " +
                       Path("d"));
  ASSERT_EQ(r.code, 0) << r.out;
  const json m = json::parse(Slurp(Path("d/metrics.json")));
  EXPECT_EQ(m.at("metrics").size(), 2u);
  const json c = json::parse(Slurp(Path("d/config.json")));
  EXPECT_EQ(c.at("train").at("sse_image").at("p0"), 0.36);
  EXPECT_EQ(c.at("train").at("sse_text").at("p0"), 0.27);
}

}  // namespace
