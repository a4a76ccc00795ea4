#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace autostream {

struct EddmConfig {
  double alpha = 0.95;
  // Errors required since the last reset before any alarm.
  std::size_t min_errors = 30;
  // Errors seen before the peak statistic starts being tracked. Keeps the
  // peak from being set by the noisy early distance estimates.
  std::size_t warmup_errors = 1000;

  void validate() const;
};

enum class DriftSignal { stable, drift };

// Early Drift Detection: tracks the mean p and standard deviation s of the
// distances between consecutive errors and alarms once (p + 2s) falls below
// alpha times its peak.
struct EddmState {
  EddmConfig config;
  std::size_t error_count = 0;
  std::optional<std::size_t> last_position;        // last observed position
  std::optional<std::size_t> last_error_position;  // distance anchor
  double mean = 0.0;  // running mean of distances
  double m2 = 0.0;    // running sum of squared deviations
  double peak = 0.0;  // max of p + 2s since reset; 0 when untracked
  double peak_mean = 0.0;
  double peak_std = 0.0;
  std::optional<double> last_ratio;
  std::size_t origin = 0;  // anchor for the first distance after a reset
  bool anchor_pending = true;

  EddmState() = default;
  explicit EddmState(const EddmConfig& c) : config(c) { c.validate(); }

  double p() const { return mean; }
  double s() const;
  double statistic() const { return p() + 2.0 * s(); }
  // Clears everything except the configuration and the position guard.
  void reset();
};

// Feeds one prediction outcome at a strictly increasing stream position.
// The first error after a reset is measured from the position just before the
// first observation. On drift the state resets.
DriftSignal eddm_update(EddmState& state, bool correct, std::size_t position);
std::pair<EddmState, DriftSignal> eddm_step(EddmState state, bool correct, std::size_t position);

// Replays a correctness stream (position i = offset + index) and returns the
// alarm positions.
std::vector<std::size_t> eddm_replay(std::span<const std::uint8_t> correct, const EddmConfig& config,
                                     std::size_t offset = 0);

}  // namespace autostream
