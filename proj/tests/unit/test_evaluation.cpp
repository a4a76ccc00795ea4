#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "autostream/evaluation.hpp"

using namespace autostream;
namespace fs = std::filesystem;

namespace {

RunLog synthetic_log(const std::vector<double>& acc, const std::vector<std::size_t>& flags = {}) {
  RunLog log;
  for (std::size_t i = 0; i < acc.size(); ++i) {
    RunRow r;
    r.run_id = "synthetic";
    r.strategy = "T1";
    r.paradigm = "smbo";
    r.batch_index = i + 1;
    r.accuracy = acc[i];
    r.drift_detected = std::find(flags.begin(), flags.end(), i + 1) != flags.end();
    log.rows.push_back(r);
  }
  log.metadata["run_id"] = "synthetic";
  return log;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("autostream_eval_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Chunk, AccuracyIsShareCorrect) {
  const std::vector<int> pred{1, 0, 1, 1, 0, 1, 1, 0, 1, 0}, truth{1, 0, 1, 0, 0, 1, 0, 0, 1, 1};
  const ChunkResult r = evaluate_chunk(pred, truth);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.7);
  EXPECT_EQ(r.correct.size(), 10u);
  EXPECT_EQ(r.correct[3], 0);
}

TEST(Chunk, EmptyOrMismatchedInputThrows) {
  EXPECT_THROW(evaluate_chunk(std::vector<int>{}, std::vector<int>{}), std::invalid_argument);
  EXPECT_THROW(evaluate_chunk(std::vector<int>{1}, std::vector<int>{1, 0}), std::invalid_argument);
}

TEST(Recovery, FlatRunRecoversImmediately) {
  std::vector<double> acc(100, 0.9);
  for (std::size_t b = 50; b < 53; ++b) acc[b - 1] = 0.6;
  const RunLog log = synthetic_log(acc, {50});
  EXPECT_NEAR(pre_drift_mean(log, 50, 40), 0.9, 1e-12);
  EXPECT_EQ(first_flag_after(log, 50), std::optional<std::size_t>(50));
  // MA over 51..55 = (0.6+0.6+0.9+0.9+0.9)/5 < 0.88; 53..57 is all 0.9.
  EXPECT_EQ(recovery_time(log, 50, RecoveryOptions{40, 5, 0.02}), std::optional<std::size_t>(3));
}

TEST(Recovery, NeverWhenAccuracyStaysLow) {
  std::vector<double> acc(100, 0.9);
  for (std::size_t b = 50; b <= 100; ++b) acc[b - 1] = 0.7;
  EXPECT_EQ(recovery_time(synthetic_log(acc, {52}), 50), std::nullopt);
}

TEST(Summary, MeanMatchesDirectAverage) {
  std::vector<double> acc;
  double sum = 0.0;
  for (int i = 0; i < 37; ++i) {
    acc.push_back(0.5 + 0.01 * (i % 13));
    sum += acc.back();
  }
  const RunSummary s = summarize(synthetic_log(acc), std::vector<std::size_t>{});
  EXPECT_NEAR(s.mean_accuracy, sum / 37.0, 1e-12);
  EXPECT_EQ(s.batches, 37u);
  EXPECT_EQ(s.recovery_text(), "n/a");
}

TEST(RunLogIo, CsvAndSidecarRoundTrip) {
  const fs::path dir = scratch("runlog");
  RunLog log = synthetic_log({0.5, 0.75, 0.125}, {2});
  log.metadata["label"] = "demo";
  save_runlog(log, (dir / "r.csv").string());
  const RunLog back = load_runlog((dir / "r.csv").string());
  ASSERT_EQ(back.rows.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_TRUE(back.rows[i].same_outcome(log.rows[i]));
  EXPECT_EQ(back.metadata["label"], "demo");
}

TEST(Report, RenderingIsIdempotent) {
  const fs::path dir = scratch("report");
  std::vector<double> acc(60, 0.9);
  RunLog a = synthetic_log(acc, {30});
  a.metadata["true_drift_batches"] = {30};
  a.rows[10].pipeline_changed = true;
  const std::vector<RunLog> logs{a};
  render_report(logs, dir.string(), {});
  std::ifstream f1(dir / "plots" / "stream.svg");
  std::stringstream s1;
  s1 << f1.rdbuf();
  render_report(logs, dir.string(), {});
  std::ifstream f2(dir / "plots" / "stream.svg");
  std::stringstream s2;
  s2 << f2.rdbuf();
  EXPECT_EQ(s1.str(), s2.str());
  EXPECT_NE(s1.str().find("class=\"drift\""), std::string::npos);
  EXPECT_NE(s1.str().find("class=\"pipeline-change\""), std::string::npos);
  EXPECT_NE(s1.str().find("class=\"true-drift\""), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "summary.csv"));
}

TEST(Report, EmptyInputRejected) {
  EXPECT_THROW(render_report({}, scratch("empty").string(), {}), std::invalid_argument);
}

TEST(Streams, GeneratedStreamWritesSidecarAndReloads) {
  const fs::path dir = scratch("stream");
  StreamSource src;
  src.n = 4000;
  src.center = 2000;
  const auto written = write_generated_stream((dir / "s.csv").string(), src, 5, 1000);
  StreamSource file;
  file.csv_path = (dir / "s.csv").string();
  const LoadedStream back = load_stream(file, 0);
  EXPECT_EQ(back.instances.size(), 4000u);
  EXPECT_EQ(back.drift_positions, written.drift_positions);
  for (std::size_t i = 0; i < 4000; i += 97) EXPECT_EQ(back.instances[i].label, written.instances[i].label);
}

TEST(Streams, SourceValidationCollectsEveryError) {
  StreamSource s;
  s.n = 10;
  s.center = 50;
  s.noise = 2.0;
  std::vector<std::string> errors;
  s.validate(errors);
  EXPECT_GE(errors.size(), 2u);
}

TEST(Sweep, CartesianProductAndResume) {
  const fs::path dir = scratch("sweep");
  SweepSpec spec;
  spec.id = "tiny";
  spec.axis = SweepAxis::strategy;
  spec.values = {"T1", "OZA"};
  spec.seeds = 2;
  spec.stream.n = 3000;
  spec.stream.center = 1500;
  spec.base.orchestrator.batch_size = 500;
  spec.base.orchestrator.budget = SearchBudget::evaluations(3);
  spec.base.orchestrator.record_timings = false;
  spec.base.oza_members = 3;
  const SweepResult first = run_sweep(spec, dir.string());
  ASSERT_EQ(first.runs.size(), 4u);
  EXPECT_EQ(first.failures(), 0u);
  for (const auto& r : first.runs) EXPECT_FALSE(r.resumed);
  const SweepResult second = run_sweep(spec, dir.string());
  for (const auto& r : second.runs) EXPECT_TRUE(r.resumed);
  for (std::size_t i = 0; i < 4; ++i) {
    ASSERT_TRUE(second.runs[i].log.has_value());
    const auto& a = first.runs[i].log->rows;
    const auto& b = second.runs[i].log->rows;
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_TRUE(a[k].same_outcome(b[k]));
  }
}

TEST(Sweep, SpecJsonRoundTrip) {
  SweepSpec spec;
  spec.axis = SweepAxis::magnitude_level;
  spec.values = {"1", "4"};
  spec.seeds = 3;
  spec.master_seed = 99;
  const SweepSpec back = sweep_spec_from_json(to_json(spec));
  EXPECT_EQ(to_json(back).dump(), to_json(spec).dump());
}

TEST(Sweep, SeedsDifferAcrossValuesAndIndices) {
  EXPECT_NE(sweep_run_seed(1, "T1", 0), sweep_run_seed(1, "DRS", 0));
  EXPECT_NE(sweep_run_seed(1, "T1", 0), sweep_run_seed(1, "T1", 1));
  EXPECT_EQ(sweep_stream_seed(1, 4), sweep_stream_seed(1, 4));
}
