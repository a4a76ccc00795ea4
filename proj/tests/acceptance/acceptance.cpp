// Acceptance suite: one pass/fail line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "autostream/adaptation.hpp"
#include "autostream/baselines.hpp"
#include "autostream/cash.hpp"
#include "autostream/eddm.hpp"
#include "autostream/evaluation.hpp"
#include "autostream/generators.hpp"
#include "autostream/learners.hpp"
#include "autostream/random.hpp"

using namespace autostream;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

constexpr std::size_t kN = 100000;
constexpr std::size_t kBatch = 1000;
constexpr std::size_t kDriftBatch = 50;
constexpr double kSeaNoise = 0.10;
constexpr std::size_t kEvals = 16;

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", 100.0 * v);
  return buf;
}

std::string fmt(double v, int digits = 4) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::uint64_t stream_seed(std::size_t i) { return sweep_stream_seed(20240611, i); }

LoadedStream make_stream(Family family, DriftKind drift, int magnitude, double noise, std::size_t seed_index,
                         std::size_t width = 1) {
  StreamSource s;
  s.family = family;
  s.n = kN;
  s.drift = drift;
  s.center = kN / 2;
  s.width = width;
  s.magnitude = magnitude;
  s.noise = noise;
  return load_stream(s, stream_seed(seed_index));
}

OrchestratorConfig base_config(std::uint64_t seed, Paradigm paradigm = Paradigm::smbo) {
  OrchestratorConfig c;
  c.batch_size = kBatch;
  c.paradigm = paradigm;
  c.budget = SearchBudget::evaluations(kEvals);
  c.seed = seed;
  c.record_timings = false;
  return c;
}

RunLog run(const std::string& method, const LoadedStream& stream, const OrchestratorConfig& cfg) {
  RunRequest r;
  r.method = method;
  r.orchestrator = cfg;
  return run_method(r, stream, method + "-" + std::to_string(cfg.seed));
}

std::string counts(std::size_t ok, std::size_t n) { return std::to_string(ok) + "/" + std::to_string(n); }

// ---- 1: T1 collapse ----------------------------------------------------------------

Outcome criterion_1() {
  std::size_t ok = 0;
  std::string drops;
  for (std::size_t s = 0; s < 10; ++s) {
    const RunLog log = run("T1", make_stream(Family::sea, DriftKind::abrupt, 4, kSeaNoise, s), base_config(s));
    const double drop = log.mean_accuracy(10, 49) - log.mean_accuracy(60, 100);
    ok += drop >= 0.10;
    drops += (s ? "," : "") + pct(drop);
  }
  return {ok >= 8, counts(ok, 10) + " seeds drop >= 10 points (drops: " + drops + ")"};
}

// ---- 2: D&RS recovery ----------------------------------------------------------------

Outcome criterion_2() {
  bool pass = true;
  std::string detail;
  for (Paradigm p : {Paradigm::smbo, Paradigm::evo}) {
    std::size_t ok = 0;
    std::string times;
    for (std::size_t s = 0; s < 10; ++s) {
      const RunLog log = run("DRS", make_stream(Family::sea, DriftKind::abrupt, 4, kSeaNoise, s), base_config(s, p));
      const auto flag = first_flag_after(log, kDriftBatch);
      std::optional<std::size_t> rec;
      if (flag) rec = recovery_time(log, kDriftBatch, RecoveryOptions{40, 5, 0.03});
      const bool good = flag && rec && *rec <= 10;
      ok += good;
      times += (s ? "," : "") + (!flag ? std::string("noflag") : rec ? std::to_string(*rec) : std::string("never"));
    }
    pass = pass && ok >= 8;
    detail += (detail.empty() ? "" : "; ") + to_string(p) + " " + counts(ok, 10) + " (batches: " + times + ")";
  }
  return {pass, detail};
}

// ---- 3: detector latency and false alarms ----------------------------------------------

Outcome criterion_3() {
  std::size_t on_time = 0;
  std::string lat;
  for (std::size_t s = 0; s < 20; ++s) {
    const RunLog log = run("T1", make_stream(Family::sea, DriftKind::abrupt, 4, kSeaNoise, s), base_config(s));
    const auto flag = first_flag_after(log, kDriftBatch);
    const bool good = flag && *flag - kDriftBatch <= 5;
    on_time += good;
    lat += (s ? "," : "") + (flag ? std::to_string(*flag - kDriftBatch) : std::string("none"));
  }
  std::size_t quiet = 0;
  std::string fa;
  for (std::size_t s = 0; s < 20; ++s) {
    const RunLog log = run("T1", make_stream(Family::sea, DriftKind::none, 4, kSeaNoise, 100 + s), base_config(s));
    // Rate over the stream's batch count (batch 0 trains, batches 1..99 are monitored).
    const double per100 = 100.0 * static_cast<double>(log.drift_batches().size()) / static_cast<double>(kN / kBatch);
    quiet += per100 <= 1.0;
    fa += (s ? "," : "") + std::to_string(log.drift_batches().size());
  }
  const bool pass = on_time * 10 >= 20 * 9 && quiet * 10 >= 20 * 8;
  return {pass, "latency <= 5 batches in " + counts(on_time, 20) + " (" + lat + "); <= 1 false alarm/100 batches in " +
                    counts(quiet, 20) + " (alarms: " + fa + ")"};
}

// ---- 4: magnitude monotonicity -----------------------------------------------------------

// P(a < x1 + x2 <= b) for x uniform on [0, 10]^2: the sum is triangular on [0, 20].
double sea_sum_cdf(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 20.0) return 1.0;
  return t <= 10.0 ? t * t / 200.0 : 1.0 - (20.0 - t) * (20.0 - t) / 200.0;
}

Outcome criterion_4() {
  std::string detail = "distance ladder";
  bool ladder_ok = true;
  double prev = -1.0;
  for (int level = 1; level <= 4; ++level) {
    const auto [a, b] = magnitude_pair(Family::sea, level);
    const double mc = concept_distance(a, b, 400000, 99 + static_cast<std::uint64_t>(level));
    const double ta = std::get<SeaConcept>(a).threshold, tb = std::get<SeaConcept>(b).threshold;
    const double exact = std::abs(sea_sum_cdf(tb) - sea_sum_cdf(ta));
    ladder_ok = ladder_ok && std::abs(mc - exact) <= 0.01 && mc > prev;
    prev = mc;
    detail += " " + fmt(mc, 3) + "/" + fmt(exact, 3);
  }
  std::size_t ok = 0;
  std::string drops;
  for (std::size_t s = 0; s < 10; ++s) {
    std::vector<double> d;
    for (int level = 1; level <= 4; ++level) {
      const RunLog log = run("T1", make_stream(Family::sea, DriftKind::abrupt, level, kSeaNoise, s), base_config(s));
      d.push_back(log.mean_accuracy(40, 49) - log.mean_accuracy(50, 54));
    }
    ok += std::is_sorted(d.begin(), d.end());
    drops += std::string(s ? " " : "") + "[" + pct(d[0]) + "," + pct(d[1]) + "," + pct(d[2]) + "," + pct(d[3]) + "]";
  }
  return {ladder_ok && ok >= 8, detail + "; drops non-decreasing in " + counts(ok, 10) + " seeds " + drops};
}

// ---- 5: gradual-drift ordering -------------------------------------------------------------

Outcome criterion_5() {
  std::size_t ok = 0;
  std::string detail;
  for (std::size_t s = 0; s < 10; ++s) {
    const LoadedStream stream = make_stream(Family::hyperplane, DriftKind::gradual, 4, 0.0, s, 40000);
    const double t1 = run("T1", stream, base_config(s)).mean_accuracy();
    const double di = run("DI", stream, base_config(s)).mean_accuracy();
    const double drt = run("DRT", stream, base_config(s)).mean_accuracy();
    ok += di - t1 >= 0.05 && drt - t1 >= 0.05;
    detail += std::string(s ? " " : "") + "[" + pct(t1) + "," + pct(di) + "," + pct(drt) + "]";
  }
  return {ok >= 8, "D&I and D&RT >= T1 + 5 points in " + counts(ok, 10) + " seeds [T1,DI,DRT] " + detail};
}

// ---- 6: stacker probe ---------------------------------------------------------------------

Outcome criterion_6() {
  std::size_t ok = 0;
  std::string detail;
  for (std::size_t s = 0; s < 10; ++s) {
    const LoadedStream stream = make_stream(Family::sea, DriftKind::abrupt, 4, kSeaNoise, s);
    OrchestratorConfig lin = base_config(s, Paradigm::random_stack);
    OrchestratorConfig gbm = lin;
    gbm.stacker = StackerKind::gbm;
    const double a_lin = run("DRT", stream, lin).mean_accuracy(kDriftBatch, 100);
    const double a_gbm = run("DRT", stream, gbm).mean_accuracy(kDriftBatch, 100);
    ok += a_gbm >= a_lin;
    detail += std::string(s ? " " : "") + "[" + pct(a_lin) + "," + pct(a_gbm) + "]";
  }
  return {ok >= 7, "gbm stacker >= linear post-drift in " + counts(ok, 10) + " seeds [linear,gbm] " + detail};
}

// ---- 7 and 8: CASH oracle and warm start ---------------------------------------------------

SearchSpace discrete_space() {
  SearchSpace space;
  space.learners.push_back({LearnerKind::decision_tree,
                            {HyperparamDomain::categorical("max_depth", {"2", "4", "6", "8"}),
                             HyperparamDomain::categorical("min_samples_leaf", {"2", "10"})}});
  space.learners.push_back({LearnerKind::knn,
                            {HyperparamDomain::categorical("k", {"1", "5", "15", "25"}),
                             HyperparamDomain::categorical("weights", {"uniform", "distance"})}});
  space.preprocessors = {HyperparamDomain::categorical("standardize", {"off", "on"}),
                         HyperparamDomain::categorical("variance_threshold", {"0", "0.0001"})};
  return space;
}

Dataset oracle_data(std::size_t s) {
  const auto g = generate_stream(Family::hyperplane, 1500, make_drift_spec(Family::hyperplane, DriftKind::none, 1500, 0, 1, 0),
                                 NoiseSpec{0.05}, stream_seed(500 + s));
  const auto batches = batchify(g.instances, 1500);
  return make_dataset(*batches.front(), g.schema);
}

struct Brute {
  std::vector<PipelineConfig> configs;
  std::vector<double> scores;
  double best = -1.0;
};

// Exhaustive scoring on the same temporal split the searches use.
Brute brute_force(const SearchSpace& space, const Dataset& data) {
  Brute b;
  const auto [train, holdout] = temporal_split(data, 0.25);
  for (const auto& c : space.enumerate()) {
    const TrainedModel m = fit_pipeline(c, train, config_fit_seed(c));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < holdout.size(); ++i) hits += m.predict(holdout.x.row(i)) == holdout.y[i];
    const double score = static_cast<double>(hits) / static_cast<double>(holdout.size());
    b.configs.push_back(c);
    b.scores.push_back(score);
    b.best = std::max(b.best, score);
  }
  return b;
}

bool in_argmax(const Brute& b, const PipelineConfig& c) {
  for (std::size_t i = 0; i < b.configs.size(); ++i)
    if (b.configs[i] == c) return b.scores[i] == b.best;
  return false;
}

Outcome criterion_7() {
  const SearchSpace space = discrete_space();
  std::size_t ok = 0, total = 0;
  std::string misses;
  for (std::size_t s = 0; s < 10; ++s) {
    const Dataset data = oracle_data(s);
    const Brute b = brute_force(space, data);
    for (Paradigm p : {Paradigm::random_stack, Paradigm::smbo, Paradigm::evo}) {
      SearchOptions o;
      o.space = space;
      o.budget = SearchBudget::evaluations(64);
      o.seed = s;
      const FittedAutoML f = run_search(p, data, o);
      const bool good = f.history.size() == 64 && in_argmax(b, f.incumbent) && f.incumbent_score == b.best;
      ok += good;
      ++total;
      if (!good) misses += " " + to_string(p) + "@" + std::to_string(s);
    }
  }
  return {ok == total, "space size " + std::to_string(space.size().value_or(0)) + "; incumbent = brute-force argmax in " +
                           counts(ok, total) + " searches" + (misses.empty() ? "" : "; misses:" + misses)};
}

Outcome criterion_8() {
  const SearchSpace space = discrete_space();
  std::size_t ok = 0, total = 0;
  for (std::size_t s = 0; s < 10; ++s) {
    const Dataset data = oracle_data(s);
    const Brute b = brute_force(space, data);
    const auto it = std::find(b.scores.begin(), b.scores.end(), b.best);
    const PipelineConfig optimum = b.configs[static_cast<std::size_t>(it - b.scores.begin())];
    for (Paradigm p : {Paradigm::random_stack, Paradigm::smbo, Paradigm::evo}) {
      SearchOptions o;
      o.space = space;
      o.budget = SearchBudget::evaluations(8);
      o.seed = 1000 + s;
      o.warm_configs = {optimum};
      const FittedAutoML f = run_search(p, data, o);
      ok += f.incumbent == optimum && f.history.front().config == optimum && f.history.front().warm;
      ++total;
    }
  }
  return {ok == total, "warm-started optimum is the incumbent in " + counts(ok, total) + " searches"};
}

// ---- 9: purity and determinism --------------------------------------------------------------

Outcome criterion_9() {
  StreamSource src;
  src.n = 20000;
  src.center = 10000;
  src.noise = kSeaNoise;
  const LoadedStream stream = load_stream(src, stream_seed(900));
  std::size_t runs = 0, violations = 0, fits = 0, mismatched = 0;
  std::string first_problem;
  std::vector<std::string> methods;
  for (StrategyKind k : all_strategies()) methods.push_back(strategy_code(k));
  for (const char* b : {"OZA", "BLAST", "GBM"}) methods.push_back(b);
  for (const auto& m : methods) {
    const bool baseline = is_baseline_name(m);
    for (Paradigm p : {Paradigm::random_stack, Paradigm::smbo, Paradigm::evo}) {
      if (baseline && p != Paradigm::random_stack) continue;
      OrchestratorConfig cfg = base_config(7, p);
      cfg.budget = SearchBudget::evaluations(6);
      if (m == "PRS") cfg.batch_size = 2000;  // keeps several retraining points in 20k instances
      RunRequest req;
      req.method = m;
      req.orchestrator = cfg;
      PurityAudit audit(cfg.window_batches);
      const RunLog a = run_method(req, stream, "purity", {}, audit.hooks());
      const RunLog b = run_method(req, stream, "purity", {});
      ++runs;
      violations += audit.violations();
      fits += audit.fits();
      if (audit.violations() && first_problem.empty()) first_problem = m + ": " + audit.messages().front();
      std::ostringstream ca, cb;
      write_runlog_csv(a, ca);
      write_runlog_csv(b, cb);
      bool same = ca.str() == cb.str() && a.rows.size() == b.rows.size();
      for (std::size_t i = 0; same && i < a.rows.size(); ++i) same = a.rows[i].same_outcome(b.rows[i]);
      mismatched += !same;
      if (!same && first_problem.empty()) first_problem = m + "/" + to_string(p) + " not reproducible";
    }
  }
  return {violations == 0 && mismatched == 0 && fits > 0,
          std::to_string(runs) + " runs, " + std::to_string(fits) + " audited fits, " + std::to_string(violations) +
              " purity violations, " + std::to_string(mismatched) + " non-identical reruns" +
              (first_problem.empty() ? "" : "; " + first_problem)};
}

// ---- 10: numerical checks ---------------------------------------------------------------------

Outcome criterion_10() {
  // Gradient check.
  double worst = 0.0;
  for (std::uint64_t prob = 0; prob < 20; ++prob) {
    Rng rng(mix_seed(77, prob));
    const std::size_t n = 20 + rng.below(30), d = 2 + rng.below(6), k = 2 + rng.below(3);
    Matrix x(n, d);
    std::vector<int> y(n);
    for (auto& v : x.data) v = rng.normal();
    for (auto& v : y) v = static_cast<int>(rng.below(k));
    std::vector<double> w(k * (d + 1)), grad(w.size());
    for (auto& v : w) v = 0.5 * rng.normal();
    const double l2 = 1e-3 * static_cast<double>(prob % 4);
    logistic_loss(w, x, y, k, l2, grad);
    double num2 = 0.0, diff2 = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double h = 1e-5;
      auto wp = w, wm = w;
      wp[i] += h;
      wm[i] -= h;
      const double fd = (logistic_loss(wp, x, y, k, l2, {}) - logistic_loss(wm, x, y, k, l2, {})) / (2 * h);
      num2 += fd * fd;
      diff2 += (fd - grad[i]) * (fd - grad[i]);
    }
    worst = std::max(worst, std::sqrt(diff2) / std::max(std::sqrt(num2), 1e-12));
  }

  // EDDM moments: streaming state against a recomputation from the stored distances.
  double moment_err = 0.0;
  for (std::uint64_t run_seed = 0; run_seed < 5; ++run_seed) {
    Rng rng(mix_seed(91, run_seed));
    EddmConfig cfg{0.95, 1000000, 0};
    EddmState st(cfg);
    std::vector<double> dist;
    std::optional<std::size_t> last_err;
    std::size_t first = 500;
    for (std::size_t pos = first; pos < first + 20000; ++pos) {
      const bool correct = !rng.bernoulli(0.1 + 0.1 * static_cast<double>(run_seed % 3));
      eddm_update(st, correct, pos);
      if (correct) continue;
      dist.push_back(static_cast<double>(pos - (last_err ? *last_err : first - 1)));
      last_err = pos;
      double mean = 0.0;
      for (double v : dist) mean += v;
      mean /= static_cast<double>(dist.size());
      double var = 0.0;
      for (double v : dist) var += (v - mean) * (v - mean);
      const double sd = std::sqrt(var / static_cast<double>(dist.size()));
      moment_err = std::max({moment_err, std::abs(st.p() - mean), std::abs(st.s() - sd)});
    }
  }

  // Boosting: training log-loss never increases with the stage count.
  std::size_t monotone = 0, models = 0;
  for (std::uint64_t s = 0; s < 6; ++s) {
    const Family fam = s % 2 ? Family::hyperplane : Family::sea;
    const auto g = generate_stream(fam, 1200, make_drift_spec(fam, DriftKind::none, 1200, 0, 1, 0), NoiseSpec{0.1},
                                   mix_seed(5, s));
    const Dataset data = make_dataset(*batchify(g.instances, 1200).front(), g.schema);
    PipelineConfig c = default_config(LearnerKind::gradient_boosted_trees);
    c.params["n_trees"] = 40.0;
    c.params["learning_rate"] = s < 3 ? 0.3 : 0.5;
    c.params["max_depth"] = static_cast<double>(2 + s % 3);
    const auto losses = staged_log_loss(fit_pipeline(c, data, s), data);
    bool ok = losses.size() == 41;
    for (std::size_t i = 1; ok && i < losses.size(); ++i) ok = losses[i] <= losses[i - 1] + 1e-12;
    monotone += ok;
    ++models;
  }
  const bool pass = worst < 1e-4 && moment_err < 1e-9 && monotone == models;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "max relative gradient error %.2e; EDDM moment error %.2e; boosting monotone %zu/%zu",
                worst, moment_err, monotone, models);
  return {pass, buf};
}

// ---- 11: time-budget sweep --------------------------------------------------------------------

Outcome criterion_11() {
  std::size_t ok = 0;
  std::string detail;
  for (std::size_t s = 0; s < 10; ++s) {
    const LoadedStream stream = make_stream(Family::sea, DriftKind::abrupt, 4, kSeaNoise, s);
    OrchestratorConfig c30 = base_config(s);
    c30.budget = SearchBudget::seconds(30);
    OrchestratorConfig c120 = c30;
    c120.budget = SearchBudget::seconds(120);
    const double a30 = run("DRS", stream, c30).mean_accuracy();
    const double a120 = run("DRS", stream, c120).mean_accuracy();
    ok += std::abs(a30 - a120) <= 0.05;
    detail += std::string(s ? " " : "") + "[" + pct(a30) + "," + pct(a120) + "]";
    std::cerr << "criterion 11 seed " << s << ": " << pct(a30) << " vs " << pct(a120) << std::endl;
  }
  return {ok >= 7, "30 s within 5 points of 120 s in " + counts(ok, 10) + " seeds [30s,120s] " + detail};
}

const std::map<int, std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::map<int, std::pair<std::string, std::function<Outcome()>>> table = {
      {1, {"T1 collapse after abrupt drift", criterion_1}},
      {2, {"D&RS recovery within 10 batches (smbo, evo)", criterion_2}},
      {3, {"EDDM latency and false-alarm rate", criterion_3}},
      {4, {"Magnitude monotonicity", criterion_4}},
      {5, {"Gradual drift: D&I and D&RT beat T1", criterion_5}},
      {6, {"Stacker probe: gbm >= linear", criterion_6}},
      {7, {"CASH oracle equivalence", criterion_7}},
      {8, {"Warm-start determinism", criterion_8}},
      {9, {"Purity and determinism", criterion_9}},
      {10, {"Numerical checks", criterion_10}},
      {11, {"Time-budget sweep 30 s vs 120 s", criterion_11}},
  };
  return table;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite; prints one PASS/FAIL line per criterion"};
  std::vector<int> selected;
  app.add_option("--criterion", selected, "Criterion numbers to run (default: all)")->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);
  if (selected.empty())
    for (const auto& [id, _] : criteria()) selected.push_back(id);

  bool all = true;
  for (int id : selected) {
    const auto& [name, fn] = criteria().at(id);
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "criterion " << id << " " << (o.pass ? "PASS" : "FAIL") << " | " << name << " | " << o.detail << " | "
              << fmt(secs, 1) << " s" << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
