#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>

#include "autostream/cash.hpp"
#include "autostream/random.hpp"

namespace autostream {

std::string to_string(Paradigm p) {
  switch (p) {
    case Paradigm::random_stack: return "random_stack";
    case Paradigm::smbo: return "smbo";
    case Paradigm::evo: return "evo";
  }
  return "unknown";
}

std::string to_string(StackerKind s) { return s == StackerKind::linear ? "linear" : "gbm"; }

std::string to_string(CombinerKind c) {
  switch (c) {
    case CombinerKind::weighted_vote: return "weighted_vote";
    case CombinerKind::greedy_selection: return "greedy_selection";
    case CombinerKind::stacker: return "stacker";
  }
  return "unknown";
}

Paradigm paradigm_from_string(const std::string& name) {
  if (name == "random_stack" || name == "random") return Paradigm::random_stack;
  if (name == "smbo") return Paradigm::smbo;
  if (name == "evo") return Paradigm::evo;
  throw std::invalid_argument("unknown paradigm '" + name + "' (expected random_stack, smbo or evo)");
}

StackerKind stacker_from_string(const std::string& name) {
  if (name == "linear") return StackerKind::linear;
  if (name == "gbm") return StackerKind::gbm;
  throw std::invalid_argument("unknown stacker '" + name + "' (expected linear or gbm)");
}

void SearchBudget::validate() const {
  if (!wall_clock_seconds && !max_evaluations) throw std::invalid_argument("search budget needs a time or evaluation limit");
  if (wall_clock_seconds && !(*wall_clock_seconds > 0.0)) throw std::invalid_argument("time budget must be positive");
  if (max_evaluations && *max_evaluations == 0) throw std::invalid_argument("evaluation budget must be positive");
  if (!(ensemble_reserve >= 0.0 && ensemble_reserve < 1.0)) throw std::invalid_argument("ensemble reserve must lie in [0, 1)");
}

std::uint64_t config_fit_seed(const PipelineConfig& config) { return mix_seed(config.hash(), 0xf17u); }

// ---- ensemble prediction -------------------------------------------------------

bool EnsembleModel::degenerate() const {
  return std::all_of(members.begin(), members.end(), [](const TrainedModel& m) { return m.degenerate(); });
}

void EnsembleModel::predict_proba(std::span<const double> raw, std::span<double> out) const {
  if (members.empty()) throw std::logic_error("ensemble has no members");
  auto p = out.subspan(0, n_classes);
  if (combiner == CombinerKind::stacker && meta && !single_fallback) {
    std::vector<double> features(members.size() * n_classes);
    for (std::size_t m = 0; m < members.size(); ++m)
      members[m].predict_proba(raw, std::span<double>(features.data() + m * n_classes, n_classes));
    meta->predict_proba(features, p);
    return;
  }
  if (combiner == CombinerKind::stacker || weights.empty()) {
    members.front().predict_proba(raw, p);
    return;
  }
  std::fill(p.begin(), p.end(), 0.0);
  std::vector<double> buf(n_classes);
  double total = 0.0;
  for (std::size_t m = 0; m < members.size(); ++m) {
    if (weights[m] <= 0.0) continue;
    members[m].predict_proba(raw, buf);
    for (std::size_t c = 0; c < n_classes; ++c) p[c] += weights[m] * buf[c];
    total += weights[m];
  }
  for (double& v : p) v /= total;
}

Predictions EnsembleModel::predict(const Dataset& data) const {
  if (!members.empty() && data.n_features() != members.front().n_features())
    throw std::invalid_argument("schema mismatch: batch feature count differs from the ensemble's");
  Predictions out;
  out.proba = Matrix(data.size(), n_classes);
  out.labels.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    predict_proba(data.x.row(i), out.proba.row(i));
    out.labels[i] = argmax(out.proba.row(i));
  }
  return out;
}

// ---- construction --------------------------------------------------------------

std::vector<std::size_t> greedy_selection(std::span<const Matrix> member_proba, std::span<const int> y,
                                          std::size_t rounds) {
  if (member_proba.empty()) throw std::invalid_argument("greedy selection needs at least one member");
  const std::size_t n = y.size();
  const std::size_t k = member_proba.front().cols;
  std::vector<double> sum(n * k, 0.0);
  std::vector<std::size_t> chosen;
  std::size_t best_len = 0;
  double best_acc = -1.0;
  for (std::size_t r = 0; r < rounds; ++r) {
    std::size_t pick = 0;
    double pick_acc = -1.0;
    for (std::size_t m = 0; m < member_proba.size(); ++m) {
      const Matrix& p = member_proba[m];
      std::size_t hits = 0;
      for (std::size_t i = 0; i < n; ++i) {
        int arg = 0;
        double top = -1.0;
        for (std::size_t c = 0; c < k; ++c) {
          const double v = sum[i * k + c] + p(i, c);
          if (v > top) {
            top = v;
            arg = static_cast<int>(c);
          }
        }
        hits += arg == y[i];
      }
      const double acc = n ? static_cast<double>(hits) / static_cast<double>(n) : 0.0;
      if (acc > pick_acc) {
        pick_acc = acc;
        pick = m;
      }
    }
    chosen.push_back(pick);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < k; ++c) sum[i * k + c] += member_proba[pick](i, c);
    if (pick_acc > best_acc) {
      best_acc = pick_acc;
      best_len = chosen.size();
    }
  }
  chosen.resize(best_len);
  return chosen;
}

namespace {

constexpr std::size_t kTopMembers = 5;
constexpr std::size_t kGreedyRounds = 10;

PipelineConfig stacker_config(StackerKind kind) {
  PipelineConfig c;
  if (kind == StackerKind::linear) {
    c.learner = LearnerKind::logistic_sgd;
    c.params = {{"learning_rate", 0.05}, {"l2", 1e-4}, {"epochs", 50.0}};
  } else {
    c.learner = LearnerKind::gradient_boosted_trees;
    c.params = {{"n_trees", 50.0}, {"learning_rate", 0.1}, {"max_depth", 3.0}};
  }
  c.preprocessing = {{"standardize", std::string("off")}, {"variance_threshold", std::string("0")}};
  return c;
}

std::vector<Matrix> member_outputs(const std::vector<TrainedModel>& members, const Dataset& holdout) {
  std::vector<Matrix> out;
  out.reserve(members.size());
  for (const auto& m : members) out.push_back(predict_batch(m, holdout).proba);
  return out;
}

double matrix_accuracy(const Matrix& proba, std::span<const int> y) {
  if (y.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < y.size(); ++i) hits += argmax(proba.row(i)) == y[i];
  return static_cast<double>(hits) / static_cast<double>(y.size());
}

void fit_stacker(EnsembleModel& e, const std::vector<Matrix>& outputs, const Dataset& holdout,
                 const FitObserver& observer) {
  e.meta.reset();
  e.weights.clear();
  e.single_fallback = e.members.size() < 2 || holdout.empty();
  if (e.single_fallback) return;
  const std::size_t k = e.n_classes;
  Dataset meta;
  meta.n_classes = k;
  meta.x = Matrix(holdout.size(), e.members.size() * k);
  for (std::size_t i = 0; i < holdout.size(); ++i)
    for (std::size_t m = 0; m < e.members.size(); ++m)
      for (std::size_t c = 0; c < k; ++c) meta.x(i, m * k + c) = outputs[m](i, c);
  meta.y = holdout.y;
  meta.source_batch = holdout.source_batch;
  meta.position = holdout.position;
  meta.kinds.assign(meta.x.cols, FeatureKind::numeric());
  if (observer) observer(meta, FitRole::meta);
  const PipelineConfig cfg = stacker_config(e.stacker_kind);
  e.meta = fit_pipeline(cfg, meta, config_fit_seed(cfg));
}

}  // namespace

void recombine_ensemble(EnsembleModel& e, const Dataset& holdout, const FitObserver& observer) {
  if (holdout.empty()) return;
  const auto outputs = member_outputs(e.members, holdout);
  switch (e.combiner) {
    case CombinerKind::stacker:
      fit_stacker(e, outputs, holdout, observer);
      return;
    case CombinerKind::weighted_vote: {
      e.weights.assign(e.members.size(), 0.0);
      double total = 0.0;
      for (std::size_t m = 0; m < e.members.size(); ++m) total += e.weights[m] = matrix_accuracy(outputs[m], holdout.y);
      if (total <= 0.0) std::fill(e.weights.begin(), e.weights.end(), 1.0);
      return;
    }
    case CombinerKind::greedy_selection: {
      const auto chosen = greedy_selection(outputs, holdout.y, kGreedyRounds);
      e.weights.assign(e.members.size(), 0.0);
      for (std::size_t idx : chosen) e.weights[idx] += 1.0;
      return;
    }
  }
}

EnsembleModel build_ensemble(std::vector<TrainedModel> candidates, std::span<const double> scores,
                             const Dataset& holdout, CombinerKind combiner, StackerKind stacker,
                             const FitObserver& observer) {
  if (candidates.empty()) throw std::invalid_argument("cannot build an ensemble from an empty history");
  if (scores.size() != candidates.size()) throw std::invalid_argument("one score per candidate required");
  EnsembleModel e;
  e.combiner = combiner;
  e.stacker_kind = stacker;
  e.n_classes = candidates.front().n_classes();

  if (combiner == CombinerKind::greedy_selection) {
    const auto outputs = member_outputs(candidates, holdout);
    auto chosen = holdout.empty() ? std::vector<std::size_t>{0} : greedy_selection(outputs, holdout.y, kGreedyRounds);
    // Keep each selected model once, weighted by how often it was picked.
    std::vector<std::size_t> distinct;
    std::vector<double> counts;
    for (std::size_t idx : chosen) {
      const auto it = std::find(distinct.begin(), distinct.end(), idx);
      if (it == distinct.end()) {
        distinct.push_back(idx);
        counts.push_back(1.0);
      } else {
        counts[static_cast<std::size_t>(it - distinct.begin())] += 1.0;
      }
    }
    for (std::size_t idx : distinct) e.members.push_back(std::move(candidates[idx]));
    e.weights = counts;
    return e;
  }

  const std::size_t top = std::min(kTopMembers, candidates.size());
  for (std::size_t i = 0; i < top; ++i) e.members.push_back(std::move(candidates[i]));
  if (combiner == CombinerKind::weighted_vote) {
    e.weights.assign(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(top));
    const double total = std::accumulate(e.weights.begin(), e.weights.end(), 0.0);
    if (total <= 0.0) std::fill(e.weights.begin(), e.weights.end(), 1.0);
    return e;
  }
  fit_stacker(e, member_outputs(e.members, holdout), holdout, observer);
  return e;
}

// ---- FittedAutoML ----------------------------------------------------------------

std::vector<PipelineConfig> FittedAutoML::member_configs() const {
  std::vector<PipelineConfig> out;
  for (const auto& m : ensemble.members) out.push_back(m.config());
  return out;
}

std::vector<PipelineConfig> FittedAutoML::top_configs(std::size_t k) const {
  std::vector<std::size_t> order(history.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return history[a].holdout_score > history[b].holdout_score; });
  std::vector<PipelineConfig> out;
  std::set<std::uint64_t> seen;
  for (std::size_t i : order) {
    if (out.size() >= k) break;
    if (seen.insert(history[i].config_hash).second) out.push_back(history[i].config);
  }
  return out;
}

FittedAutoML refit(const FittedAutoML& fitted, const Dataset& data, const FitObserver& observer,
                   double holdout_fraction) {
  if (data.empty()) throw std::invalid_argument("cannot refit on empty data");
  if (fitted.ensemble.members.empty()) throw std::invalid_argument("nothing to refit: ensemble has no members");
  auto [train, holdout] = temporal_split(data, holdout_fraction);
  if (train.empty()) train = data;
  FittedAutoML out = fitted;
  for (auto& member : out.ensemble.members) {
    if (observer) observer(train, FitRole::member);
    member = fit_pipeline(member.config(), train, config_fit_seed(member.config()));
  }
  recombine_ensemble(out.ensemble, holdout, observer);
  return out;
}

FittedAutoML partial_fit_ensemble(const FittedAutoML& fitted, const Dataset& data, std::uint64_t seed,
                                  const FitObserver& observer, double holdout_fraction) {
  for (const auto& m : fitted.ensemble.members)
    if (!is_incremental(m.config().learner)) throw std::logic_error("learner not incremental-capable");
  if (data.empty()) return fitted;
  auto [train, holdout] = temporal_split(data, holdout_fraction);
  if (train.empty()) train = data;
  FittedAutoML out = fitted;
  for (std::size_t i = 0; i < out.ensemble.members.size(); ++i) {
    if (observer) observer(train, FitRole::incremental);
    partial_fit_in_place(out.ensemble.members[i], train, mix_seed(seed, i));
  }
  recombine_ensemble(out.ensemble, holdout, observer);
  return out;
}

void write_history_csv(const FittedAutoML& fitted, std::ostream& out) {
  out << "index,config_hash,learner,holdout_score,fit_seconds,warm,config\n";
  char buf[32];
  for (std::size_t i = 0; i < fitted.history.size(); ++i) {
    const auto& r = fitted.history[i];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(r.config_hash));
    out << i << ',' << buf << ',' << to_string(r.config.learner) << ',' << r.holdout_score << ',' << r.fit_seconds
        << ',' << (r.warm ? 1 : 0) << ',' << r.config.canonical() << '\n';
  }
}

}  // namespace autostream
