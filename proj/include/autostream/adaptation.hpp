#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "autostream/cash.hpp"
#include "autostream/eddm.hpp"
#include "autostream/runlog.hpp"
#include "autostream/stream.hpp"

namespace autostream {

enum class StrategyKind { train_once, detect_increment, detect_retrain, detect_warmstart, detect_restart, periodic_restart };

// Short codes T1, DI, DRT, DWS, DRS, PRS.
std::string strategy_code(StrategyKind s);
std::string to_string(StrategyKind s);
// Accepts the short codes, the long names and the D&X spellings.
StrategyKind strategy_from_string(const std::string& name);
std::vector<StrategyKind> all_strategies();
bool is_detect_strategy(StrategyKind s);

struct OrchestratorConfig {
  std::size_t batch_size = 1000;
  std::size_t window_batches = 3;
  Paradigm paradigm = Paradigm::smbo;
  SearchBudget budget = SearchBudget::evaluations(20);
  StackerKind stacker = StackerKind::linear;
  std::uint64_t seed = 0;
  EddmConfig eddm;
  // Forced drift batches; when set the detector is bypassed.
  std::optional<std::vector<std::size_t>> preset_drifts;
  // D&WS: keep the previous best member next to the new ensemble.
  bool carry_over_members = false;
  std::optional<SearchSpace> space;
  bool record_timings = true;

  static std::size_t default_batch_size(StrategyKind s) {
    return s == StrategyKind::periodic_restart ? 20000 : 1000;
  }
  void validate() const;
};

struct RunHooks {
  // Every training call: the batch being processed, the data, its role.
  std::function<void(std::size_t batch_index, const Dataset& data, FitRole role)> on_fit;
  // Just before the deployed model predicts batch `batch_index`.
  std::function<void(std::size_t batch_index)> on_predict;
};

// Test-then-train audit: a batch must never be predicted by a model that saw
// it, and every fit must draw only from the current window.
class PurityAudit {
 public:
  explicit PurityAudit(std::size_t window_batches) : window_(window_batches) {}
  RunHooks hooks();
  std::size_t violations() const { return messages_.size(); }
  const std::vector<std::string>& messages() const { return messages_; }
  std::size_t fits() const { return fits_; }

 private:
  std::size_t window_;
  std::optional<std::size_t> max_trained_;
  std::size_t fits_ = 0;
  std::vector<std::string> messages_;
};

struct RunState {
  FittedAutoML deployed;
  SlidingWindow window;
  EddmState detector;
  std::size_t retrains = 0;
  std::size_t drifts = 0;
  std::size_t pipeline_changes = 0;
};

struct StrategyContext {
  const StreamSchema& schema;
  const OrchestratorConfig& config;
  const SearchSpace& space;
  std::size_t batch_index = 0;
  FitObserver observer;
};

// Acts on one batch-level signal after the batch has entered the window.
// Returns true when the deployed model was retrained or replaced.
bool apply_strategy(StrategyKind strategy, RunState& state, DriftSignal signal, const StrategyContext& ctx);

// Batch 0 trains the first ensemble; every later batch is predicted, fed to
// the detector, pushed into the window, and handed to the strategy.
RunLog run_stream(const std::vector<BatchPtr>& batches, const StreamSchema& schema, StrategyKind strategy,
                  const OrchestratorConfig& config, const RunHooks& hooks = {}, const std::string& run_id = "");

}  // namespace autostream
