#include "autostream/adaptation.hpp"

#include <algorithm>
#include <chrono>
#include <set>
#include <stdexcept>

#include "autostream/random.hpp"
#include "autostream/version.hpp"

namespace autostream {

namespace {

struct StrategyName {
  StrategyKind kind;
  const char* code;
  const char* name;
  const char* ampersand;
};

constexpr StrategyName kStrategies[] = {
    {StrategyKind::train_once, "T1", "train_once", "T1"},
    {StrategyKind::detect_increment, "DI", "detect_increment", "D&I"},
    {StrategyKind::detect_retrain, "DRT", "detect_retrain", "D&RT"},
    {StrategyKind::detect_warmstart, "DWS", "detect_warmstart", "D&WS"},
    {StrategyKind::detect_restart, "DRS", "detect_restart", "D&RS"},
    {StrategyKind::periodic_restart, "PRS", "periodic_restart", "PRS"},
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

}  // namespace

std::string strategy_code(StrategyKind s) {
  for (const auto& n : kStrategies)
    if (n.kind == s) return n.code;
  return "?";
}

std::string to_string(StrategyKind s) {
  for (const auto& n : kStrategies)
    if (n.kind == s) return n.name;
  return "unknown";
}

StrategyKind strategy_from_string(const std::string& name) {
  for (const auto& n : kStrategies)
    if (name == n.code || name == n.name || name == n.ampersand) return n.kind;
  throw std::invalid_argument("unknown strategy '" + name + "' (expected T1, DI, DRT, DWS, DRS or PRS)");
}

std::vector<StrategyKind> all_strategies() {
  std::vector<StrategyKind> out;
  for (const auto& n : kStrategies) out.push_back(n.kind);
  return out;
}

bool is_detect_strategy(StrategyKind s) {
  return s == StrategyKind::detect_increment || s == StrategyKind::detect_retrain ||
         s == StrategyKind::detect_warmstart || s == StrategyKind::detect_restart;
}

void OrchestratorConfig::validate() const {
  std::vector<std::string> errors;
  if (batch_size < 100) errors.push_back("batch_size must be at least 100");
  if (window_batches < 1) errors.push_back("window capacity must be at least 1");
  try {
    budget.validate();
  } catch (const std::exception& e) {
    errors.emplace_back(e.what());
  }
  try {
    eddm.validate();
  } catch (const std::exception& e) {
    errors.emplace_back(e.what());
  }
  if (space) {
    try {
      space->validate();
    } catch (const std::exception& e) {
      errors.emplace_back(e.what());
    }
  }
  if (errors.empty()) return;
  std::string msg = "invalid orchestrator config:";
  for (const auto& e : errors) msg += "\n  - " + e;
  throw std::invalid_argument(msg);
}

RunHooks PurityAudit::hooks() {
  RunHooks h;
  h.on_fit = [this](std::size_t batch_index, const Dataset& data, FitRole) {
    ++fits_;
    const std::size_t lowest = batch_index + 1 >= window_ ? batch_index + 1 - window_ : 0;
    for (std::size_t src : data.source_batch) {
      if (src > batch_index || src < lowest) {
        messages_.push_back("fit during batch " + std::to_string(batch_index) + " used rows of batch " +
                            std::to_string(src) + " outside the window");
        break;
      }
    }
    if (const auto m = data.max_source_batch()) max_trained_ = std::max(max_trained_.value_or(0), *m);
  };
  h.on_predict = [this](std::size_t batch_index) {
    if (max_trained_ && *max_trained_ >= batch_index)
      messages_.push_back("batch " + std::to_string(batch_index) + " predicted by a model trained on batch " +
                          std::to_string(*max_trained_));
  };
  return h;
}

namespace {

SearchOptions search_options(const StrategyContext& ctx, std::vector<PipelineConfig> warm) {
  SearchOptions o;
  o.space = ctx.space;
  o.budget = ctx.config.budget;
  o.seed = mix_seed(ctx.config.seed, ctx.batch_index);
  o.warm_configs = std::move(warm);
  o.stacker = ctx.config.stacker;
  o.observer = ctx.observer;
  return o;
}

}  // namespace

bool apply_strategy(StrategyKind strategy, RunState& state, DriftSignal signal, const StrategyContext& ctx) {
  const bool drift = signal == DriftSignal::drift;
  switch (strategy) {
    case StrategyKind::train_once:
      return false;
    case StrategyKind::detect_increment:
      if (!drift) return false;
      state.deployed = partial_fit_ensemble(state.deployed, make_dataset(state.window, ctx.schema),
                                            mix_seed(ctx.config.seed, ctx.batch_index), ctx.observer);
      return true;
    case StrategyKind::detect_retrain:
      if (!drift) return false;
      state.deployed = refit(state.deployed, make_dataset(state.window, ctx.schema), ctx.observer);
      return true;
    case StrategyKind::detect_warmstart: {
      if (!drift) return false;
      const Dataset data = make_dataset(state.window, ctx.schema);
      FittedAutoML next = run_search(ctx.config.paradigm, data, search_options(ctx, state.deployed.top_configs(5)));
      if (ctx.config.carry_over_members && !state.deployed.ensemble.members.empty()) {
        next.ensemble.members.push_back(state.deployed.ensemble.members.front());
        if (!next.ensemble.weights.empty()) next.ensemble.weights.push_back(0.0);
        recombine_ensemble(next.ensemble, temporal_split(data).second, ctx.observer);
      }
      state.deployed = std::move(next);
      return true;
    }
    case StrategyKind::detect_restart:
      if (!drift) return false;
      state.deployed = run_search(ctx.config.paradigm, make_dataset(state.window, ctx.schema), search_options(ctx, {}));
      return true;
    case StrategyKind::periodic_restart:
      state.deployed = run_search(ctx.config.paradigm, make_dataset(state.window, ctx.schema), search_options(ctx, {}));
      return true;
  }
  return false;
}

RunLog run_stream(const std::vector<BatchPtr>& batches, const StreamSchema& schema, StrategyKind strategy,
                  const OrchestratorConfig& config, const RunHooks& hooks, const std::string& run_id) {
  config.validate();
  schema.validate();
  if (batches.size() < 2) throw std::invalid_argument("run_stream needs at least 2 batches");

  SearchSpace space = config.space.value_or(SearchSpace::defaults());
  if (strategy == StrategyKind::detect_increment) space = space.restrict_to_incremental();
  const std::set<std::size_t> preset = config.preset_drifts
                                           ? std::set<std::size_t>(config.preset_drifts->begin(), config.preset_drifts->end())
                                           : std::set<std::size_t>{};

  RunState state{FittedAutoML{}, SlidingWindow(config.window_batches), EddmState(config.eddm), 0, 0, 0};
  std::size_t current = 0;
  FitObserver observer;
  if (hooks.on_fit) observer = [&](const Dataset& d, FitRole role) { hooks.on_fit(current, d, role); };
  StrategyContext ctx{schema, config, space, 0, observer};

  RunLog log;
  const std::string id = run_id.empty() ? strategy_code(strategy) + "-" + to_string(config.paradigm) + "-" +
                                              std::to_string(config.seed)
                                        : run_id;

  const auto t0 = Clock::now();
  state.window.push(batches.front());
  try {
    state.deployed = run_search(config.paradigm, make_dataset(state.window, schema), search_options(ctx, {}));
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("initial search on batch 0 failed: ") + e.what());
  }
  const double initial_fit = config.record_timings ? seconds_since(t0) : 0.0;
  if (strategy == StrategyKind::detect_increment)
    for (const auto& m : state.deployed.ensemble.members)
      if (!is_incremental(m.config().learner))
        throw std::invalid_argument("detect_increment requires incremental-capable members, found " +
                                    to_string(m.config().learner));
  std::uint64_t deployed_hash = state.deployed.incumbent.hash();

  for (std::size_t b = 1; b < batches.size(); ++b) {
    const Batch& batch = *batches[b];
    if (b > 0 && batch.index <= batches[b - 1]->index) throw std::invalid_argument("non-monotonic batch index");
    current = batch.index;
    ctx.batch_index = batch.index;

    // Test.
    if (hooks.on_predict) hooks.on_predict(batch.index);
    const auto tp = Clock::now();
    const Dataset test = make_dataset(batch, schema);
    const Predictions pred = state.deployed.ensemble.predict(test);
    const double predict_seconds = config.record_timings ? seconds_since(tp) : 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < test.size(); ++i) hits += pred.labels[i] == test.y[i];
    const double acc = test.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(test.size());

    // Detect.
    bool drift = false;
    if (config.preset_drifts) {
      drift = preset.count(batch.index) > 0;
    } else if (strategy != StrategyKind::periodic_restart) {
      for (std::size_t i = 0; i < test.size(); ++i)
        if (eddm_update(state.detector, pred.labels[i] == test.y[i], batch.first_position + i) == DriftSignal::drift)
          drift = true;
      if (drift) state.detector.reset();
    }

    // Train.
    state.window.push(batches[b]);
    const auto tf = Clock::now();
    const bool retrained = apply_strategy(strategy, state, drift ? DriftSignal::drift : DriftSignal::stable, ctx);
    const double fit_seconds = config.record_timings && retrained ? seconds_since(tf) : 0.0;

    const std::uint64_t h = state.deployed.incumbent.hash();
    const bool changed = h != deployed_hash;
    deployed_hash = h;
    state.drifts += drift;
    state.retrains += retrained;
    state.pipeline_changes += changed;

    log.rows.push_back(RunRow{id, strategy_code(strategy), to_string(config.paradigm), config.seed, batch.index, acc,
                              drift, retrained, changed, fit_seconds, predict_seconds});
  }

  auto& m = log.metadata;
  m["run_id"] = id;
  m["strategy"] = strategy_code(strategy);
  m["paradigm"] = to_string(config.paradigm);
  m["seed"] = config.seed;
  m["batch_size"] = config.batch_size;
  m["window_batches"] = config.window_batches;
  m["stacker"] = to_string(config.stacker);
  if (config.budget.wall_clock_seconds) m["budget_seconds"] = *config.budget.wall_clock_seconds;
  if (config.budget.max_evaluations) m["budget_evaluations"] = *config.budget.max_evaluations;
  m["eddm"] = {{"alpha", config.eddm.alpha},
               {"min_errors", config.eddm.min_errors},
               {"warmup_errors", config.eddm.warmup_errors}};
  if (config.preset_drifts) m["preset_drifts"] = *config.preset_drifts;
  m["carry_over_members"] = config.carry_over_members;
  m["n_batches"] = batches.size();
  m["initial_fit_seconds"] = initial_fit;
  m["initial_incumbent"] = to_json(state.deployed.incumbent);
  m["software_version"] = kVersion;
  return log;
}

}  // namespace autostream
