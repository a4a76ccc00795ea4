#include <gtest/gtest.h>

#include <set>

#include "autostream/cash.hpp"
#include "autostream/generators.hpp"
#include "autostream/random.hpp"

using namespace autostream;

namespace {

Dataset sea_window(std::size_t n, std::uint64_t seed) {
  const auto spec = make_drift_spec(Family::sea, DriftKind::none, n, 0, 1, 1);
  const auto s = generate_stream(Family::sea, n, spec, NoiseSpec{0.05}, seed);
  const auto batches = batchify(s.instances, 500);
  return make_dataset(std::span<const BatchPtr>(batches), s.schema);
}

SearchOptions small_options(std::uint64_t seed, std::size_t evals = 8) {
  SearchOptions o;
  o.budget = SearchBudget::evaluations(evals);
  o.seed = seed;
  return o;
}

}  // namespace

class AllParadigms : public ::testing::TestWithParam<Paradigm> {};

TEST_P(AllParadigms, RespectsEvaluationBudgetAndDeduplicates) {
  const Dataset d = sea_window(2000, 1);
  const FittedAutoML f = run_search(GetParam(), d, small_options(3));
  EXPECT_EQ(f.history.size(), 8u);
  std::set<std::uint64_t> hashes;
  for (const auto& r : f.history) hashes.insert(r.config_hash);
  EXPECT_EQ(hashes.size(), f.history.size());
  EXPECT_FALSE(f.ensemble.members.empty());
}

TEST_P(AllParadigms, IncumbentHasBestHoldoutScore) {
  const FittedAutoML f = run_search(GetParam(), sea_window(2000, 2), small_options(4));
  double best = 0.0;
  for (const auto& r : f.history) best = std::max(best, r.holdout_score);
  EXPECT_DOUBLE_EQ(f.incumbent_score, best);
}

TEST_P(AllParadigms, WarmConfigsAreEvaluatedFirst) {
  SearchOptions o = small_options(5);
  const auto space = SearchSpace::defaults();
  o.warm_configs = {sample_config(space, 100), sample_config(space, 101)};
  const FittedAutoML f = run_search(GetParam(), sea_window(2000, 3), o);
  ASSERT_GE(f.history.size(), 2u);
  EXPECT_EQ(f.history[0].config, o.warm_configs[0]);
  EXPECT_EQ(f.history[1].config, o.warm_configs[1]);
  EXPECT_TRUE(f.history[0].warm);
}

TEST_P(AllParadigms, SameSeedSameHistory) {
  const Dataset d = sea_window(2000, 4);
  const FittedAutoML a = run_search(GetParam(), d, small_options(6));
  const FittedAutoML b = run_search(GetParam(), d, small_options(6));
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].config, b.history[i].config);
    EXPECT_EQ(a.history[i].holdout_score, b.history[i].holdout_score);
  }
}

TEST_P(AllParadigms, RestrictedSpaceYieldsIncrementalMembers) {
  SearchOptions o = small_options(7);
  o.space = SearchSpace::defaults().restrict_to_incremental();
  const FittedAutoML f = run_search(GetParam(), sea_window(2000, 5), o);
  for (const auto& m : f.ensemble.members) EXPECT_TRUE(is_incremental(m.config().learner));
}

TEST_P(AllParadigms, FitsOnlyOnTrainSplitForMembers) {
  SearchOptions o = small_options(8);
  const Dataset d = sea_window(2000, 6);
  std::size_t member_fits = 0;
  o.observer = [&](const Dataset& data, FitRole role) {
    if (role == FitRole::member) {
      ++member_fits;
      EXPECT_EQ(data.size(), 1500u);
    }
  };
  run_search(GetParam(), d, o);
  EXPECT_GE(member_fits, 8u);
}

INSTANTIATE_TEST_SUITE_P(Cash, AllParadigms, ::testing::Values(Paradigm::random_stack, Paradigm::smbo, Paradigm::evo),
                         [](const auto& info) { return to_string(info.param); });

TEST(Cash, TinyTimeBudgetIsAnError) {
  SearchOptions o;
  o.budget = SearchBudget::seconds(1e-12);
  try {
    smbo_search(sea_window(1000, 1), o);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "budget exhausted before first evaluation");
  }
}

TEST(Cash, EmptyDataRejected) {
  EXPECT_THROW(evo_search(Dataset{}, small_options(1)), std::invalid_argument);
}

TEST(Cash, GreedySelectionPicksTheOnlyPerfectMember) {
  // Member 1 is always right; members 0 and 2 are always wrong.
  const std::vector<int> y{0, 1, 0, 1};
  std::vector<Matrix> proba(3, Matrix(4, 2));
  for (std::size_t i = 0; i < 4; ++i) {
    const auto t = static_cast<std::size_t>(y[i]);
    proba[0](i, 1 - t) = 1.0;
    proba[1](i, t) = 1.0;
    proba[2](i, 1 - t) = 1.0;
  }
  const auto chosen = greedy_selection(proba, y, 5);
  ASSERT_FALSE(chosen.empty());
  for (auto c : chosen) EXPECT_EQ(c, 1u);
}

TEST(Cash, TopConfigsAreDistinctAndSorted) {
  const FittedAutoML f = run_search(Paradigm::random_stack, sea_window(2000, 9), small_options(2, 10));
  const auto top = f.top_configs(5);
  ASSERT_EQ(top.size(), 5u);
  std::set<std::string> s;
  for (const auto& c : top) s.insert(c.canonical());
  EXPECT_EQ(s.size(), 5u);
  EXPECT_EQ(top.front(), f.incumbent);
}

TEST(Cash, StackerFallsBackWithOneMember) {
  const Dataset d = sea_window(2000, 10);
  const auto [train, holdout] = temporal_split(d);
  std::vector<TrainedModel> one{fit_pipeline(default_config(LearnerKind::decision_tree), train, 0)};
  const std::vector<double> score{0.9};
  const EnsembleModel e = build_ensemble(one, score, holdout, CombinerKind::stacker, StackerKind::linear);
  EXPECT_TRUE(e.single_fallback);
  EXPECT_EQ(e.predict(holdout).labels, predict_batch(one[0], holdout).labels);
}

TEST(Cash, BudgetValidation) {
  EXPECT_THROW((SearchBudget{std::nullopt, std::nullopt, 0.2}).validate(), std::invalid_argument);
  EXPECT_THROW(SearchBudget::evaluations(0).validate(), std::invalid_argument);
}
