#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "autostream/generators.hpp"
#include "autostream/learners.hpp"
#include "autostream/pipeline_space.hpp"
#include "autostream/random.hpp"

using namespace autostream;

namespace {

Dataset sea_data(std::size_t n, double threshold, std::uint64_t seed, std::size_t first_batch = 0) {
  Rng rng(seed);
  std::vector<Instance> rows(n);
  for (auto& r : rows) {
    r.features = {rng.uniform(0, 10), rng.uniform(0, 10), rng.uniform(0, 10)};
    r.label = sea_label(r.features, SeaConcept{threshold});
  }
  auto batches = batchify(rows, n);
  auto b = std::const_pointer_cast<Batch>(batches[0]);
  b->index = first_batch;
  return make_dataset(*b, StreamSchema::numeric(3, 2));
}

double acc(const TrainedModel& m, const Dataset& d) {
  const auto p = predict_batch(m, d);
  return accuracy(p.labels, d.y);
}

}  // namespace

TEST(Learners, EveryKindLearnsSea) {
  const Dataset train = sea_data(2000, 8.0, 1), test = sea_data(1000, 8.0, 2);
  for (LearnerKind k : all_learner_kinds()) {
    const TrainedModel m = fit_pipeline(default_config(k), train, 3);
    EXPECT_GT(acc(m, test), 0.85) << to_string(k);
  }
}

TEST(Learners, ProbabilitiesSumToOne) {
  const Dataset train = sea_data(500, 8.0, 1);
  for (LearnerKind k : all_learner_kinds()) {
    const TrainedModel m = fit_pipeline(default_config(k), train, 3);
    const auto p = predict_batch(m, train);
    for (std::size_t i = 0; i < p.proba.rows; ++i) {
      double s = 0.0;
      for (double v : p.proba.row(i)) s += v;
      ASSERT_NEAR(s, 1.0, 1e-9) << to_string(k);
    }
  }
}

TEST(Learners, SingleClassGivesConstantModel) {
  Dataset d = sea_data(100, 30.0, 1);  // threshold above every sum: all positive
  const TrainedModel m = fit_pipeline(default_config(LearnerKind::knn), d, 0);
  EXPECT_TRUE(m.degenerate());
  std::vector<double> p(2);
  m.predict_proba(d.x.row(0), p);
  EXPECT_EQ(p[1], 1.0);
  EXPECT_EQ(m.predict(d.x.row(5)), 1);
}

TEST(Learners, EmptyDataThrows) {
  Dataset empty;
  empty.x = Matrix(0, 3);
  EXPECT_THROW(fit_pipeline(default_config(LearnerKind::decision_tree), empty, 0), std::invalid_argument);
}

TEST(Learners, KnnOneNeighbourMemorisesTraining) {
  PipelineConfig c = default_config(LearnerKind::knn);
  c.params["k"] = 1.0;
  const Dataset d = sea_data(300, 8.0, 4);
  EXPECT_EQ(acc(fit_pipeline(c, d, 0), d), 1.0);
}

TEST(Learners, PredictionIsDeterministic) {
  const Dataset d = sea_data(800, 8.0, 5);
  const TrainedModel m = fit_pipeline(default_config(LearnerKind::random_forest), d, 9);
  EXPECT_EQ(predict_batch(m, d).labels, predict_batch(m, d).labels);
  const TrainedModel m2 = fit_pipeline(default_config(LearnerKind::random_forest), d, 9);
  EXPECT_EQ(predict_batch(m, d).labels, predict_batch(m2, d).labels);
}

TEST(PartialFit, AppendsTreesAndKeepsExistingOnes) {
  PipelineConfig c = default_config(LearnerKind::gradient_boosted_trees);
  c.params["n_trees"] = 50.0;
  // Identity preprocessing, so running-statistic updates cannot move the inputs.
  c.preprocessing["standardize"] = std::string("off");
  const Dataset a = sea_data(1000, 8.0, 1), b = sea_data(1000, 9.0, 2, 1);
  const TrainedModel m = fit_pipeline(c, a, 0);
  const TrainedModel n = partial_fit(m, b, 1);
  EXPECT_EQ(m.tree_count(), 50u);
  EXPECT_EQ(n.tree_count(), 60u);
  // The first 50 stages are untouched: their staged losses on `a` agree.
  const auto la = staged_log_loss(m, a), lb = staged_log_loss(n, a);
  for (std::size_t s = 0; s <= 50; ++s) ASSERT_DOUBLE_EQ(la[s], lb[s]);
}

TEST(PartialFit, ForestGrowsByOneFifth) {
  PipelineConfig c = default_config(LearnerKind::random_forest);
  c.params["n_trees"] = 20.0;
  const TrainedModel m = fit_pipeline(c, sea_data(500, 8.0, 1), 0);
  EXPECT_EQ(partial_fit(m, sea_data(500, 8.0, 2, 1), 1).tree_count(), 24u);
}

TEST(PartialFit, EmptyDataLeavesModelUnchanged) {
  const Dataset a = sea_data(500, 8.0, 1);
  const TrainedModel m = fit_pipeline(default_config(LearnerKind::logistic_sgd), a, 0);
  Dataset empty;
  empty.x = Matrix(0, 3);
  const TrainedModel n = partial_fit(m, empty, 1);
  EXPECT_EQ(predict_batch(m, a).proba.data, predict_batch(n, a).proba.data);
}

TEST(PartialFit, NonIncrementalKindRejected) {
  const Dataset a = sea_data(300, 8.0, 1);
  TrainedModel m = fit_pipeline(default_config(LearnerKind::knn), a, 0);
  try {
    partial_fit_in_place(m, a, 0);
    FAIL();
  } catch (const std::logic_error& e) {
    EXPECT_NE(std::string(e.what()).find("learner not incremental-capable"), std::string::npos);
  }
}

TEST(PartialFit, ImprovesAfterAbruptDriftInMostSeeds) {
  std::size_t better = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Dataset before = sea_data(3000, 8.0, 100 + s);
    const Dataset after = sea_data(3000, 9.5, 200 + s, 1);
    const Dataset test = sea_data(2000, 9.5, 300 + s, 2);
    const TrainedModel frozen = fit_pipeline(default_config(LearnerKind::gradient_boosted_trees), before, s);
    const TrainedModel updated = partial_fit(frozen, after, s);
    better += acc(updated, test) > acc(frozen, test);
  }
  EXPECT_GE(better, 6u);
}

TEST(Logistic, AnalyticGradientMatchesFiniteDifferences) {
  Rng rng(12);
  const std::size_t n = 30, d = 4, k = 3;
  Matrix x(n, d);
  std::vector<int> y(n);
  for (auto& v : x.data) v = rng.normal();
  for (auto& v : y) v = static_cast<int>(rng.below(k));
  std::vector<double> w(k * (d + 1));
  for (auto& v : w) v = 0.3 * rng.normal();
  std::vector<double> grad(w.size());
  logistic_loss(w, x, y, k, 0.01, grad);
  for (std::size_t i = 0; i < w.size(); ++i) {
    auto wp = w, wm = w;
    const double h = 1e-5;
    wp[i] += h;
    wm[i] -= h;
    const double fd = (logistic_loss(wp, x, y, k, 0.01, {}) - logistic_loss(wm, x, y, k, 0.01, {})) / (2 * h);
    EXPECT_NEAR(grad[i], fd, 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST(Preprocessing, StatisticsComeOnlyFromTrainingRows) {
  Dataset a = sea_data(200, 8.0, 1);
  a.x(0, 0) = kMissing;
  PipelineConfig c = default_config(LearnerKind::logistic_sgd);
  const TrainedModel m = fit_pipeline(c, a, 0);
  double mean = 0.0;
  for (std::size_t i = 1; i < a.size(); ++i) mean += a.x(i, 0);
  mean /= static_cast<double>(a.size() - 1);
  EXPECT_NEAR(m.preprocessing().impute_means()[0], mean, 1e-12);
  EXPECT_EQ(m.preprocessing().rows_seen(), a.size());
}
