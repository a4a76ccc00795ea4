#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "autostream/cli.hpp"

using namespace autostream;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "autostream");
  std::ostringstream out, err;
  const int code = cli_dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("autostream_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Cli, HelpSucceeds) { EXPECT_EQ(cli({"--help"}).code, kExitOk); }

TEST(Cli, UnknownSubcommandIsUsageError) { EXPECT_EQ(cli({"frobnicate"}).code, kExitUsage); }

TEST(Cli, MisspelledFlagGetsSuggestion) {
  const Result r = cli({"run", "--stratgy", "T1"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("--strategy"), std::string::npos);
}

TEST(Cli, InvalidValuesReportedTogether) {
  const Result r = cli({"run", "--strategy", "XYZ", "--paradigm", "grid", "--window", "0"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("XYZ"), std::string::npos);
  EXPECT_NE(r.err.find("grid"), std::string::npos);
}

TEST(Cli, MissingInputFileFailsValidation) {
  const Result r = cli({"run", "--stream", "/nonexistent/file.csv", "--out", scratch("missing").string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("/nonexistent/file.csv"), std::string::npos);
}

TEST(Cli, UnreadableRunDirectoryIsRuntimeError) {
  const fs::path dir = scratch("noruns");
  std::ofstream(dir / "broken.csv") << "not,a,run,log\n";
  EXPECT_EQ(cli({"report", "--runs", (dir / "broken.csv").string(), "--out", (dir / "out").string()}).code,
            kExitRuntime);
}

TEST(Cli, GenerateWritesCsvAndSidecar) {
  const fs::path dir = scratch("gen");
  const Result r = cli({"generate", "--family", "sea", "--n", "2000", "--center", "1000", "--seed", "3", "--out",
                        (dir / "s.csv").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(dir / "s.csv"));
  EXPECT_TRUE(fs::exists(dir / "s.json"));
}

TEST(Cli, DetectPrintsAlarmPositions) {
  const fs::path dir = scratch("detect");
  {
    std::ofstream f(dir / "c.txt");
    f << "# outcomes\n";
    for (int i = 0; i < 3000; ++i) f << ((i < 1500 ? i % 20 == 0 : i % 3 == 0) ? 0 : 1) << '\n';
  }
  const Result r = cli({"detect", "--input", (dir / "c.txt").string(), "--warmup", "0"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_FALSE(r.out.empty());
}

TEST(Cli, RunAndReport) {
  const fs::path dir = scratch("run");
  const Result run = cli({"run", "--n", "3000", "--center", "1500", "--strategy", "T1,GBM", "--batch-size", "500",
                          "--budget-evals", "3", "--timings", "off", "--out", (dir / "runs").string()});
  ASSERT_EQ(run.code, kExitOk) << run.err;
  const Result rep = cli({"report", "--runs", (dir / "runs").string(), "--out", (dir / "report").string()});
  ASSERT_EQ(rep.code, kExitOk) << rep.err;
  EXPECT_TRUE(fs::exists(dir / "report" / "summary.csv"));
}

TEST(CliHelpers, Levenshtein) {
  EXPECT_EQ(levenshtein("kitten", "sitting"), 3u);
  EXPECT_EQ(levenshtein("", "abc"), 3u);
  EXPECT_EQ(suggest("paradgm", {"paradigm", "seed"}), std::optional<std::string>("paradigm"));
  EXPECT_EQ(suggest("zzzzzzzz", {"paradigm", "seed"}), std::nullopt);
}

TEST(CliHelpers, IndexListParsing) {
  EXPECT_EQ(parse_index_list("3,10,42"), (std::vector<std::size_t>{3, 10, 42}));
  EXPECT_THROW(parse_index_list("3,x"), std::invalid_argument);
}

TEST(CliHelpers, CorrectnessReader) {
  std::istringstream in("1 0, 1 # trailing\n0\n");
  EXPECT_EQ(read_correctness(in), (std::vector<std::uint8_t>{1, 0, 1, 0}));
  std::istringstream bad("1 2");
  EXPECT_THROW(read_correctness(bad), std::invalid_argument);
}

TEST(CliConfig, ViolationsListEveryProblem) {
  ExperimentConfig c;
  c.methods = {"NOPE"};
  c.paradigm = "grid";
  c.stacker = "tree";
  EXPECT_GE(c.violations().size(), 3u);
  ExperimentConfig ok;
  EXPECT_TRUE(ok.violations().empty());
  EXPECT_EQ(ok.request("PRS").orchestrator.batch_size, 20000u);
  EXPECT_EQ(ok.request("T1").orchestrator.batch_size, 1000u);
}

TEST(CliConfig, JsonFileSuppliesFlagsAndCommandLineWins) {
  const fs::path dir = scratch("config");
  std::ofstream(dir / "cfg.json") << R"({"strategy": ["T1", "GBM"], "seed": 3, "n": 3000, "center": 1500,
    "batch-size": 500, "budget-evals": 2, "timings": "off", "out": ")" << (dir / "from_config").string() << "\"}";
  const Result r = cli({"run", "--config", (dir / "cfg.json").string(), "--seed", "4"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(dir / "from_config" / "T1-smbo-4.csv"));
  EXPECT_TRUE(fs::exists(dir / "from_config" / "GBM-4.csv"));
}

TEST(CliConfig, UnknownJsonKeyIsUsageError) {
  const fs::path dir = scratch("config_bad");
  std::ofstream(dir / "cfg.json") << R"({"stratgy": "T1"})";
  const Result r = cli({"run", "--config", (dir / "cfg.json").string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("strategy"), std::string::npos);
}

TEST(CliConfig, MissingConfigFileIsUsageError) {
  EXPECT_EQ(cli({"detect", "--input", "x.txt", "--config", "/nonexistent/cfg.json"}).code, kExitUsage);
}
