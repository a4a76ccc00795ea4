#include <gtest/gtest.h>

#include <cmath>
#include <optional>

#include "autostream/eddm.hpp"
#include "autostream/random.hpp"

using namespace autostream;

namespace {

// Straight-line reference: recomputes the mean and population deviation of
// all error distances from scratch at every error.
std::vector<std::size_t> reference_alarms(const std::vector<std::uint8_t>& correct, double alpha,
                                          std::size_t min_errors) {
  std::vector<std::size_t> alarms;
  std::vector<double> distances;
  std::optional<std::size_t> last_error;
  std::size_t origin = 0;
  bool fresh = true;
  double peak = 0.0;
  for (std::size_t i = 0; i < correct.size(); ++i) {
    if (fresh) {
      origin = i == 0 ? 0 : i - 1;
      fresh = false;
    }
    if (correct[i]) continue;
    distances.push_back(static_cast<double>(i - (last_error ? *last_error : origin)));
    last_error = i;
    double mean = 0.0;
    for (double d : distances) mean += d;
    mean /= static_cast<double>(distances.size());
    double var = 0.0;
    for (double d : distances) var += (d - mean) * (d - mean);
    const double stat = mean + 2.0 * std::sqrt(var / static_cast<double>(distances.size()));
    if (stat > peak) peak = stat;
    if (distances.size() >= min_errors && stat / peak < alpha) {
      alarms.push_back(i);
      distances.clear();
      last_error.reset();
      peak = 0.0;
      fresh = true;
    }
  }
  return alarms;
}

std::vector<std::uint8_t> error_stream(std::size_t n, double rate_before, double rate_after, std::size_t change,
                                       std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::uint8_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = rng.bernoulli(i < change ? rate_before : rate_after) ? 0 : 1;
  return out;
}

}  // namespace

TEST(Eddm, MatchesReferenceAlarmsWithoutWarmup) {
  EddmConfig cfg;
  cfg.warmup_errors = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto stream = error_stream(20000, 0.1, 0.35, 10000, seed);
    EXPECT_EQ(eddm_replay(stream, cfg), reference_alarms(stream, cfg.alpha, cfg.min_errors)) << "seed " << seed;
  }
}

TEST(Eddm, NoAlarmBeforeMinErrors) {
  EddmConfig cfg;
  cfg.warmup_errors = 0;
  cfg.min_errors = 30;
  // 29 errors: spread out, then dense. Too few to alarm.
  std::vector<std::uint8_t> stream(2000, 1);
  for (std::size_t k = 0; k < 20; ++k) stream[k * 50] = 0;
  for (std::size_t k = 0; k < 9; ++k) stream[1500 + k] = 0;
  EXPECT_TRUE(eddm_replay(stream, cfg).empty());
}

TEST(Eddm, DetectsErrorRateJump) {
  const auto stream = error_stream(60000, 0.05, 0.4, 40000, 7);
  const auto alarms = eddm_replay(stream, EddmConfig{});
  ASSERT_FALSE(alarms.empty());
  bool after = false;
  for (auto a : alarms) after = after || (a >= 40000 && a < 45000);
  EXPECT_TRUE(after);
}

TEST(Eddm, StateResetsOnDrift) {
  EddmConfig cfg;
  cfg.warmup_errors = 0;
  EddmState state(cfg);
  const auto stream = error_stream(20000, 0.05, 0.5, 10000, 3);
  for (std::size_t i = 0; i < stream.size(); ++i) {
    if (eddm_update(state, stream[i] != 0, i) == DriftSignal::drift) {
      EXPECT_EQ(state.error_count, 0u);
      EXPECT_EQ(state.peak, 0.0);
      return;
    }
  }
  FAIL() << "no alarm";
}

TEST(Eddm, RejectsNonIncreasingPosition) {
  EddmState state{EddmConfig{}};
  eddm_update(state, true, 5);
  EXPECT_THROW(eddm_update(state, true, 5), std::invalid_argument);
}

TEST(Eddm, ConfigValidation) {
  EddmConfig cfg;
  cfg.alpha = 1.5;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Eddm, FunctionalStepMatchesInPlace) {
  const auto stream = error_stream(5000, 0.2, 0.2, 0, 11);
  EddmState a{EddmConfig{}};
  EddmState b{EddmConfig{}};
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const auto sig = eddm_update(a, stream[i] != 0, i);
    auto [next, sig2] = eddm_step(b, stream[i] != 0, i);
    b = next;
    ASSERT_EQ(sig, sig2);
  }
  EXPECT_DOUBLE_EQ(a.mean, b.mean);
  EXPECT_DOUBLE_EQ(a.m2, b.m2);
}
