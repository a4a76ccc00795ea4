#include "autostream/eddm.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace autostream {

void EddmConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("EDDM alpha must lie in (0, 1)");
  if (min_errors < 2) throw std::invalid_argument("EDDM min_errors must be at least 2");
}

double EddmState::s() const {
  return error_count > 0 ? std::sqrt(m2 / static_cast<double>(error_count)) : 0.0;
}

void EddmState::reset() {
  error_count = 0;
  last_error_position.reset();
  mean = 0.0;
  m2 = 0.0;
  peak = 0.0;
  peak_mean = 0.0;
  peak_std = 0.0;
  last_ratio.reset();
  // Next observation re-anchors the distance origin.
  anchor_pending = true;
}

DriftSignal eddm_update(EddmState& st, bool correct, std::size_t position) {
  if (st.last_position && position <= *st.last_position)
    throw std::invalid_argument("EDDM positions must be strictly increasing (got " + std::to_string(position) +
                                " after " + std::to_string(*st.last_position) + ")");
  if (st.anchor_pending || !st.last_position) {
    st.origin = position == 0 ? 0 : position - 1;
    st.anchor_pending = false;
  }
  st.last_position = position;
  if (correct) return DriftSignal::stable;

  const std::size_t anchor = st.last_error_position ? *st.last_error_position : st.origin;
  const double distance = position >= anchor ? static_cast<double>(position - anchor) : 1.0;
  st.last_error_position = position;
  ++st.error_count;
  const double delta = distance - st.mean;
  st.mean += delta / static_cast<double>(st.error_count);
  st.m2 += delta * (distance - st.mean);

  if (st.error_count < st.config.warmup_errors) return DriftSignal::stable;
  const double stat = st.statistic();
  if (stat > st.peak) {
    st.peak = stat;
    st.peak_mean = st.p();
    st.peak_std = st.s();
  }
  if (st.error_count < st.config.min_errors || st.peak <= 0.0) return DriftSignal::stable;
  st.last_ratio = stat / st.peak;
  if (*st.last_ratio < st.config.alpha) {
    st.reset();
    return DriftSignal::drift;
  }
  return DriftSignal::stable;
}

std::pair<EddmState, DriftSignal> eddm_step(EddmState state, bool correct, std::size_t position) {
  const DriftSignal s = eddm_update(state, correct, position);
  return {std::move(state), s};
}

std::vector<std::size_t> eddm_replay(std::span<const std::uint8_t> correct, const EddmConfig& config,
                                     std::size_t offset) {
  EddmState st(config);
  std::vector<std::size_t> alarms;
  for (std::size_t i = 0; i < correct.size(); ++i)
    if (eddm_update(st, correct[i] != 0, offset + i) == DriftSignal::drift) alarms.push_back(offset + i);
  return alarms;
}

}  // namespace autostream
