#include <gtest/gtest.h>

#include "autostream/adaptation.hpp"
#include "autostream/generators.hpp"

using namespace autostream;

namespace {

struct Fixture {
  StreamSchema schema;
  std::vector<BatchPtr> batches;
};

Fixture small_stream(std::size_t n_batches = 10, std::size_t batch = 300, std::uint64_t seed = 1) {
  const std::size_t n = n_batches * batch;
  const auto spec = make_drift_spec(Family::sea, DriftKind::abrupt, n, n / 2, 1, 4);
  auto s = generate_stream(Family::sea, n, spec, NoiseSpec{0.05}, seed);
  return {s.schema, batchify(s.instances, batch)};
}

OrchestratorConfig quick(std::uint64_t seed = 0) {
  OrchestratorConfig c;
  c.batch_size = 300;
  c.budget = SearchBudget::evaluations(4);
  c.seed = seed;
  c.record_timings = false;
  return c;
}

}  // namespace

TEST(Strategy, CodesRoundTrip) {
  for (StrategyKind s : all_strategies()) {
    EXPECT_EQ(strategy_from_string(strategy_code(s)), s);
    EXPECT_EQ(strategy_from_string(to_string(s)), s);
  }
  EXPECT_EQ(strategy_from_string("D&RS"), StrategyKind::detect_restart);
  EXPECT_THROW(strategy_from_string("bogus"), std::invalid_argument);
}

TEST(Orchestrator, TrainOnceNeverRetrains) {
  const auto f = small_stream();
  OrchestratorConfig c = quick();
  c.preset_drifts = std::vector<std::size_t>{3, 6};
  const RunLog log = run_stream(f.batches, f.schema, StrategyKind::train_once, c);
  ASSERT_EQ(log.rows.size(), 9u);
  EXPECT_EQ(log.retrain_count(), 0u);
  EXPECT_EQ(log.drift_batches(), (std::vector<std::size_t>{3, 6}));
}

TEST(Orchestrator, PeriodicRestartRetrainsEveryBatch) {
  const auto f = small_stream(5);
  const RunLog log = run_stream(f.batches, f.schema, StrategyKind::periodic_restart, quick());
  EXPECT_EQ(log.retrain_count(), log.rows.size());
  EXPECT_TRUE(log.drift_batches().empty());
}

TEST(Orchestrator, DetectStrategiesRetrainExactlyOnPresetDrifts) {
  const auto f = small_stream();
  for (StrategyKind s : {StrategyKind::detect_increment, StrategyKind::detect_retrain,
                         StrategyKind::detect_warmstart, StrategyKind::detect_restart}) {
    OrchestratorConfig c = quick();
    c.preset_drifts = std::vector<std::size_t>{4, 7};
    const RunLog log = run_stream(f.batches, f.schema, s, c);
    for (const auto& r : log.rows) EXPECT_EQ(r.retrained, r.batch_index == 4 || r.batch_index == 7) << to_string(s);
  }
}

TEST(Orchestrator, RetrainKeepsConfigsFrozen) {
  const auto f = small_stream();
  OrchestratorConfig c = quick();
  c.preset_drifts = std::vector<std::size_t>{3, 5, 8};
  const RunLog log = run_stream(f.batches, f.schema, StrategyKind::detect_retrain, c);
  EXPECT_EQ(log.pipeline_change_count(), 0u);
}

TEST(Orchestrator, FitsUseOnlyTheWindowAndNeverTheTestedBatchEarly) {
  const auto f = small_stream(12);
  for (StrategyKind s : all_strategies()) {
    OrchestratorConfig c = quick();
    if (s != StrategyKind::periodic_restart) c.preset_drifts = std::vector<std::size_t>{2, 5, 9};
    PurityAudit audit(c.window_batches);
    run_stream(f.batches, f.schema, s, c, audit.hooks());
    EXPECT_EQ(audit.violations(), 0u) << to_string(s) << ": "
                                      << (audit.messages().empty() ? "" : audit.messages().front());
    EXPECT_GT(audit.fits(), 0u);
  }
}

TEST(Orchestrator, AuditCatchesPeekingFit) {
  PurityAudit audit(3);
  auto hooks = audit.hooks();
  const auto f = small_stream(4);
  const Dataset future = make_dataset(*f.batches[3], f.schema);
  hooks.on_fit(1, future, FitRole::member);
  hooks.on_predict(2);
  EXPECT_GT(audit.violations(), 0u);
}

TEST(Orchestrator, SameConfigSameOutcome) {
  const auto f = small_stream();
  const RunLog a = run_stream(f.batches, f.schema, StrategyKind::detect_restart, quick(3));
  const RunLog b = run_stream(f.batches, f.schema, StrategyKind::detect_restart, quick(3));
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) EXPECT_TRUE(a.rows[i].same_outcome(b.rows[i]));
}

TEST(Orchestrator, IncrementAppendsTreesToMembers) {
  const auto f = small_stream();
  OrchestratorConfig c = quick();
  c.preset_drifts = std::vector<std::size_t>{5};
  std::size_t incremental = 0;
  RunHooks hooks;
  hooks.on_fit = [&](std::size_t, const Dataset&, FitRole role) { incremental += role == FitRole::incremental; };
  run_stream(f.batches, f.schema, StrategyKind::detect_increment, c, hooks);
  EXPECT_GT(incremental, 0u);
}

TEST(Orchestrator, RejectsTooFewBatches) {
  auto f = small_stream(2);
  f.batches.resize(1);
  EXPECT_THROW(run_stream(f.batches, f.schema, StrategyKind::train_once, quick()), std::invalid_argument);
}

TEST(Orchestrator, ConfigValidation) {
  OrchestratorConfig c;
  c.window_batches = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}
