#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "g2s/cli.hpp"
#include "g2s/corpus.hpp"

using namespace g2s;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "g2s");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return std::string(G2S_TEST_DATA) + "/" + name; }

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("g2s_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, StatsReport) {
  const CliResult r = cli({"stats", "--input", data("stats3.amr"), "--pair", "describe", "genius"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("0\t0.333\n2\t0.667\n4\t1.000\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("\t14\n"), std::string::npos) << r.out;
}

TEST_F(CliTest, EvalPrintsBleu) {
  write("hyp.txt", "the cat sat on the mat\n");
  write("ref.txt", "the cat sat on the mat\n");
  const CliResult r = cli({"eval", "--hyp", path("hyp.txt"), "--ref", path("ref.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "BLEU = 100.0000\n");
  write("ref.txt", "the cat sat on the mat\nextra line\n");
  EXPECT_NE(cli({"eval", "--hyp", path("hyp.txt"), "--ref", path("ref.txt")}).code, 0);
}

TEST_F(CliTest, ErrorsGiveNonZeroExit) {
  EXPECT_NE(cli({"stats", "--input", data("stats3.amr"), "--bogus"}).code, 0);
  EXPECT_NE(cli({"stats", "--input", path("missing.amr")}).code, 0);
  EXPECT_NE(cli({"generate", "--model", path("missing.ckpt"), "--input", data("toy20.amr")}).code, 0);
  EXPECT_NE(cli({"frobnicate"}).code, 0);
  write("bad.amr", "(a / alpha :ARG0 (b / beta)\n");
  const CliResult r = cli({"stats", "--input", path("bad.amr")});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("error"), std::string::npos);
}

TEST_F(CliTest, PreprocessWritesArtifacts) {
  const CliResult r = cli({"preprocess", "--input", data("toy20.amr"), "--out-dir", path("pre")});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"vocab.txt", "labels.txt", "chars.txt", "linearized.txt", "sentences.txt", "graphs.jsonl"})
    EXPECT_TRUE(fs::exists(path("pre") + "/" + f)) << f;
  EXPECT_EQ(read_lines(path("pre/linearized.txt")).size(), 20u);
}

TEST_F(CliTest, TrainThenGenerate) {
  const std::vector<std::string> arch{"--hidden", "8", "--word-dim", "8", "--label-dim", "8", "--steps", "2", "--copy"};
  std::vector<std::string> train{"train", "--train", data("toy20.amr"), "--dev", data("toy20.amr"),
                                 "--out", path("m.ckpt"), "--log", path("train.log"), "--epochs", "2",
                                 "--beam", "2", "--max-len", "12"};
  train.insert(train.end(), arch.begin(), arch.end());
  const CliResult t = cli(train);
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_NE(t.out.find("best epoch"), std::string::npos);
  ASSERT_TRUE(fs::exists(path("m.ckpt")));

  const CliResult beam1 = cli({"generate", "--model", path("m.ckpt"), "--input", data("toy20.amr"), "--beam", "1",
                         "--max-len", "12", "--output", path("beam1.txt")});
  ASSERT_EQ(beam1.code, 0) << beam1.err;
  const CliResult greedy = cli({"generate", "--model", path("m.ckpt"), "--input", data("toy20.amr"), "--greedy",
                          "--max-len", "12"});
  ASSERT_EQ(greedy.code, 0) << greedy.err;
  const auto lines = read_lines(path("beam1.txt"));
  EXPECT_EQ(lines.size(), 20u);
  std::string joined;
  for (const auto& l : lines) joined += l + "\n";
  EXPECT_EQ(joined, greedy.out);
}

TEST_F(CliTest, GradcheckSmallModel) {
  const CliResult r = cli({"gradcheck", "--hidden", "4", "--word-dim", "4", "--label-dim", "4", "--char-dim", "4",
                     "--char-hidden", "4", "--steps", "2", "--samples", "3"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("max relative error"), std::string::npos);
}
