#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <unordered_set>

#include "autostream/cash.hpp"
#include "autostream/random.hpp"
#include "tree.hpp"

namespace autostream {
namespace {

using Clock = std::chrono::steady_clock;

constexpr std::size_t kPoolSize = 25;
constexpr std::size_t kSmboInitial = 5;
constexpr std::size_t kSmboCandidates = 500;
constexpr std::size_t kSurrogateTrees = 10;
constexpr double kXi = 0.01;
constexpr std::size_t kPopulation = 20;
constexpr double kCrossoverRate = 0.3;
constexpr std::size_t kEnumerationLimit = 200000;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Shared bookkeeping for all three paradigms: budget, history, deduplication
// and the pool of best fitted models kept for ensemble construction.
class SearchRun {
 public:
  SearchRun(const Dataset& data, const SearchOptions& options, Paradigm paradigm)
      : options_(options), paradigm_(paradigm), rng_(options.seed), start_(Clock::now()) {
    if (data.empty()) throw std::invalid_argument("cannot search on empty data");
    options.budget.validate();
    options.space.validate();
    auto split = temporal_split(data, options.holdout_fraction);
    train_ = std::move(split.first);
    holdout_ = std::move(split.second);
    if (train_.empty()) train_ = data;
  }

  Rng& rng() { return rng_; }
  const SearchSpace& space() const { return options_.space; }
  const std::vector<EvalRecord>& history() const { return history_; }

  bool can_start() const {
    const auto& b = options_.budget;
    if (b.max_evaluations && history_.size() >= *b.max_evaluations) return false;
    if (b.wall_clock_seconds && seconds_since(start_) >= (1.0 - b.ensemble_reserve) * *b.wall_clock_seconds) return false;
    return true;
  }

  bool seen(const PipelineConfig& c) const { return evaluated_.count(c.hash()) > 0; }

  // Evaluates the warm configs that are valid in the space, in order.
  // Calls `on_eval` with each new history index.
  template <typename F>
  void run_warm(F&& on_eval) {
    for (const auto& c : options_.warm_configs) {
      if (!can_start()) return;
      if (!is_valid(c, space())) continue;
      if (options_.deduplicate && seen(c)) continue;
      on_eval(evaluate(c, true));
    }
  }

  std::size_t evaluate(const PipelineConfig& config, bool warm) {
    const auto t0 = Clock::now();
    if (options_.observer) options_.observer(train_, FitRole::member);
    TrainedModel model = fit_pipeline(config, train_, config_fit_seed(config));
    double score = 0.0;
    if (!holdout_.empty()) score = accuracy(predict_batch(model, holdout_).labels, holdout_.y);
    EvalRecord rec{config, config.hash(), score, seconds_since(t0), warm};
    evaluated_.insert(rec.config_hash);
    history_.push_back(rec);
    remember(score, history_.size() - 1, std::move(model));
    return history_.size() - 1;
  }

  // Uniform proposal; with deduplication, retries and then falls back to the
  // unevaluated part of a finite space. nullopt once a finite space is spent.
  std::optional<PipelineConfig> propose_random() {
    PipelineConfig c = sample_config(space(), rng_);
    if (!options_.deduplicate || !seen(c)) return c;
    for (int attempt = 0; attempt < 100; ++attempt) {
      c = sample_config(space(), rng_);
      if (!seen(c)) return c;
    }
    if (auto rest = unevaluated(); rest) {
      if (rest->empty()) return std::nullopt;
      return (*rest)[rng_.below(rest->size())];
    }
    return c;
  }

  // Unevaluated configs of a finite space; nullopt when the space is not
  // enumerable (continuous or too large).
  std::optional<std::vector<PipelineConfig>> unevaluated() {
    if (!enumerated_) {
      enumerated_ = true;
      const auto n = space().size();
      if (n && *n <= kEnumerationLimit) all_configs_ = space().enumerate();
    }
    if (all_configs_.empty()) return std::nullopt;
    std::vector<PipelineConfig> out;
    for (const auto& c : all_configs_)
      if (!seen(c)) out.push_back(c);
    return out;
  }

  bool deduplicate() const { return options_.deduplicate; }

  FittedAutoML finish(CombinerKind combiner) {
    if (history_.empty()) throw std::runtime_error("budget exhausted before first evaluation");
    FittedAutoML out;
    out.paradigm = paradigm_;
    out.space = space();
    out.history = history_;
    std::size_t best = 0;
    for (std::size_t i = 1; i < history_.size(); ++i)
      if (history_[i].holdout_score > history_[best].holdout_score) best = i;
    out.incumbent = history_[best].config;
    out.incumbent_score = history_[best].holdout_score;

    std::vector<TrainedModel> models;
    std::vector<double> scores;
    for (auto& entry : pool_) {
      scores.push_back(entry.score);
      models.push_back(std::move(entry.model));
    }
    pool_.clear();
    out.ensemble = build_ensemble(std::move(models), scores, holdout_, combiner, options_.stacker, options_.observer);
    return out;
  }

 private:
  struct PoolEntry {
    double score;
    std::size_t order;
    TrainedModel model;
  };

  void remember(double score, std::size_t order, TrainedModel model) {
    auto pos = std::find_if(pool_.begin(), pool_.end(), [&](const PoolEntry& e) { return score > e.score; });
    if (pos == pool_.end() && pool_.size() >= kPoolSize) return;
    pool_.insert(pos, PoolEntry{score, order, std::move(model)});
    if (pool_.size() > kPoolSize) pool_.pop_back();
  }

  const SearchOptions& options_;
  Paradigm paradigm_;
  Rng rng_;
  Clock::time_point start_;
  Dataset train_;
  Dataset holdout_;
  std::vector<EvalRecord> history_;
  std::unordered_set<std::uint64_t> evaluated_;
  std::vector<PoolEntry> pool_;
  bool enumerated_ = false;
  std::vector<PipelineConfig> all_configs_;
};

// ---- SMBO surrogate ----------------------------------------------------------

class ForestSurrogate {
 public:
  ForestSurrogate(const Matrix& x, const std::vector<double>& y, std::uint64_t seed) {
    TreeParams p;
    p.max_depth = 20;
    p.min_samples_leaf = 1;
    p.max_features = std::max(1, static_cast<int>(std::ceil(static_cast<double>(x.cols) * 5.0 / 6.0)));
    std::vector<std::size_t> rows(x.rows);
    for (std::size_t t = 0; t < kSurrogateTrees; ++t) {
      Rng rng(mix_seed(seed, t));
      for (auto& r : rows) r = rng.below(x.rows);
      trees_.push_back(Tree::fit_regressor(x, y, {}, rows, p, &rng));
    }
  }

  // Mean and standard deviation across the trees.
  std::pair<double, double> predict(std::span<const double> row) const {
    double sum = 0.0, sq = 0.0;
    for (const auto& t : trees_) {
      const double v = t.value(row);
      sum += v;
      sq += v * v;
    }
    const auto n = static_cast<double>(trees_.size());
    const double mean = sum / n;
    return {mean, std::sqrt(std::max(0.0, sq / n - mean * mean))};
  }

 private:
  std::vector<Tree> trees_;
};

double expected_improvement(double mean, double sd, double best) {
  const double gap = mean - best - kXi;
  if (sd <= 1e-12) return std::max(0.0, gap);
  const double z = gap / sd;
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  return gap * cdf + sd * pdf;
}

std::optional<PipelineConfig> propose_ei(SearchRun& run, std::uint64_t seed) {
  const auto& hist = run.history();
  if (hist.size() < 2) return run.propose_random();

  const SearchSpace& space = run.space();
  Matrix x(hist.size(), space.encoding_size());
  std::vector<double> y(hist.size());
  double best = hist.front().holdout_score;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    const auto enc = encode_config(hist[i].config, space);
    std::copy(enc.begin(), enc.end(), x.row(i).begin());
    y[i] = hist[i].holdout_score;
    best = std::max(best, y[i]);
  }
  const ForestSurrogate surrogate(x, y, mix_seed(seed, hist.size()));

  std::vector<PipelineConfig> candidates;
  candidates.reserve(kSmboCandidates);
  for (std::size_t i = 0; i < kSmboCandidates; ++i) {
    PipelineConfig c = sample_config(space, run.rng());
    if (run.deduplicate() && run.seen(c)) continue;
    candidates.push_back(std::move(c));
  }
  if (candidates.empty() && run.deduplicate()) {
    auto rest = run.unevaluated();
    if (rest) {
      if (rest->empty()) return std::nullopt;
      candidates = std::move(*rest);
    } else {
      return run.propose_random();
    }
  }
  std::size_t pick = 0;
  double pick_ei = -1.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto enc = encode_config(candidates[i], space);
    const auto [mean, sd] = surrogate.predict(enc);
    const double ei = expected_improvement(mean, sd, best);
    if (ei > pick_ei) {
      pick_ei = ei;
      pick = i;
    }
  }
  return candidates[pick];
}

}  // namespace

FittedAutoML random_search_stack(const Dataset& data, const SearchOptions& options) {
  SearchRun run(data, options, Paradigm::random_stack);
  run.run_warm([](std::size_t) {});
  while (run.can_start()) {
    auto c = run.propose_random();
    if (!c) break;
    run.evaluate(*c, false);
  }
  return run.finish(CombinerKind::stacker);
}

FittedAutoML smbo_search(const Dataset& data, const SearchOptions& options) {
  SearchRun run(data, options, Paradigm::smbo);
  run.run_warm([](std::size_t) {});
  if (options.warm_configs.empty()) {
    for (std::size_t i = 0; i < kSmboInitial && run.can_start(); ++i) {
      auto c = run.propose_random();
      if (!c) break;
      run.evaluate(*c, false);
    }
  }
  while (run.can_start()) {
    auto c = propose_ei(run, options.seed);
    if (!c) break;
    run.evaluate(*c, false);
  }
  return run.finish(CombinerKind::greedy_selection);
}

FittedAutoML evo_search(const Dataset& data, const SearchOptions& options) {
  SearchRun run(data, options, Paradigm::evo);
  std::vector<std::size_t> population;  // history indices
  const auto score = [&](std::size_t idx) { return run.history()[idx].holdout_score; };
  // Steady-state insertion: fill up, then replace the worst if beaten.
  const auto admit = [&](std::size_t idx) {
    if (population.size() < kPopulation) {
      population.push_back(idx);
      return;
    }
    std::size_t worst = 0;
    for (std::size_t i = 1; i < population.size(); ++i)
      if (score(population[i]) < score(population[worst])) worst = i;
    if (score(idx) > score(population[worst])) population[worst] = idx;
  };

  run.run_warm(admit);
  while (population.size() < kPopulation && run.can_start()) {
    auto c = run.propose_random();
    if (!c) break;
    admit(run.evaluate(*c, false));
  }

  Rng& rng = run.rng();
  const auto tournament = [&]() -> const PipelineConfig& {
    const std::size_t a = population[rng.below(population.size())];
    const std::size_t b = population[rng.below(population.size())];
    return run.history()[score(b) > score(a) ? b : a].config;
  };
  while (run.can_start() && !population.empty()) {
    const PipelineConfig& p1 = tournament();
    const PipelineConfig& p2 = tournament();
    PipelineConfig child = rng.bernoulli(kCrossoverRate) ? crossover_configs(p1, p2, run.space(), rng) : p1;
    child = mutate_config(child, run.space(), rng);
    if (run.deduplicate() && run.seen(child)) {
      bool fresh = false;
      for (int attempt = 0; attempt < 20 && !fresh; ++attempt) {
        child = mutate_config(child, run.space(), rng);
        fresh = !run.seen(child);
      }
      if (!fresh) {
        auto c = run.propose_random();
        if (!c) break;
        child = std::move(*c);
      }
    }
    admit(run.evaluate(child, false));
  }
  return run.finish(CombinerKind::weighted_vote);
}

FittedAutoML run_search(Paradigm paradigm, const Dataset& data, const SearchOptions& options) {
  switch (paradigm) {
    case Paradigm::random_stack: return random_search_stack(data, options);
    case Paradigm::smbo: return smbo_search(data, options);
    case Paradigm::evo: return evo_search(data, options);
  }
  throw std::invalid_argument("unknown paradigm");
}

}  // namespace autostream
