#include "autostream/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <stdexcept>

#include "autostream/random.hpp"
#include "autostream/version.hpp"
#include "hoeffding_tree.hpp"

namespace autostream {

class OnlineMember {
 public:
  virtual ~OnlineMember() = default;
  virtual void learn(std::span<const double> x, int label, int times) = 0;
  virtual void predict_proba(std::span<const double> x, std::span<double> out) const = 0;
  double updates = 0.0;
};

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

class TreeMember final : public OnlineMember {
 public:
  TreeMember(std::size_t d, std::size_t k) : tree_(d, k) {}
  void learn(std::span<const double> x, int label, int times) override {
    tree_.learn(x, label, static_cast<double>(times));
  }
  void predict_proba(std::span<const double> x, std::span<double> out) const override { tree_.predict_proba(x, out); }

 private:
  HoeffdingTree tree_;
};

// Softmax regression with running standardization and a constant step.
class LogisticMember final : public OnlineMember {
 public:
  LogisticMember(std::size_t d, std::size_t k) : d_(d), k_(k), w_(k * (d + 1), 0.0), mean_(d), m2_(d), z_(d), p_(k) {}

  void learn(std::span<const double> x, int label, int times) override {
    for (int t = 0; t < times; ++t) {
      n_ += 1.0;
      for (std::size_t j = 0; j < d_; ++j) {
        const double delta = x[j] - mean_[j];
        mean_[j] += delta / n_;
        m2_[j] += delta * (x[j] - mean_[j]);
      }
      scores(x, p_);
      for (std::size_t c = 0; c < k_; ++c) {
        const double g = p_[c] - (static_cast<int>(c) == label ? 1.0 : 0.0);
        double* row = w_.data() + c * (d_ + 1);
        for (std::size_t j = 0; j < d_; ++j) row[j] -= kRate * (g * z_[j] + kL2 * row[j]);
        row[d_] -= kRate * g;
      }
    }
  }

  void predict_proba(std::span<const double> x, std::span<double> out) const override {
    std::vector<double> z(d_);
    standardize(x, z);
    softmax(z, out);
  }

 private:
  static constexpr double kRate = 0.01;
  static constexpr double kL2 = 1e-4;

  void standardize(std::span<const double> x, std::span<double> z) const {
    for (std::size_t j = 0; j < d_; ++j) {
      const double var = n_ > 1.0 ? m2_[j] / n_ : 0.0;
      z[j] = var > 1e-12 ? (x[j] - mean_[j]) / std::sqrt(var) : 0.0;
    }
  }

  void softmax(std::span<const double> z, std::span<double> out) const {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k_; ++c) {
      const double* row = w_.data() + c * (d_ + 1);
      double s = row[d_];
      for (std::size_t j = 0; j < d_; ++j) s += row[j] * z[j];
      out[c] = s;
      best = std::max(best, s);
    }
    double sum = 0.0;
    for (std::size_t c = 0; c < k_; ++c) sum += out[c] = std::exp(out[c] - best);
    for (std::size_t c = 0; c < k_; ++c) out[c] /= sum;
  }

  void scores(std::span<const double> x, std::span<double> out) {
    standardize(x, z_);
    softmax(z_, out);
  }

  std::size_t d_, k_;
  std::vector<double> w_;
  double n_ = 0.0;
  std::vector<double> mean_, m2_, z_, p_;
};

struct BaselineName {
  BaselineKind kind;
  const char* code;
  const char* name;
};

constexpr BaselineName kBaselines[] = {
    {BaselineKind::oza, "OZA", "oza"},
    {BaselineKind::blast, "BLAST", "blast"},
    {BaselineKind::gbm, "GBM", "gbm"},
};

}  // namespace

std::string baseline_code(BaselineKind kind) {
  for (const auto& b : kBaselines)
    if (b.kind == kind) return b.code;
  return "?";
}

BaselineKind baseline_from_string(const std::string& name) {
  for (const auto& b : kBaselines)
    if (name == b.code || name == b.name) return b.kind;
  throw std::invalid_argument("unknown baseline '" + name + "' (expected OZA, BLAST or GBM)");
}

int oza_poisson_draw(std::uint64_t seed, std::size_t position, std::size_t member) {
  const std::uint64_t bits = splitmix64(mix_seed(mix_seed(seed, position), member));
  const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
  // Inverse CDF of Poisson(1).
  double term = std::exp(-1.0);
  double cdf = term;
  int k = 0;
  while (u >= cdf && k < 30) {
    ++k;
    term /= k;
    cdf += term;
  }
  return k;
}

// ---- Oza ----------------------------------------------------------------------

OzaEnsemble::OzaEnsemble(const StreamSchema& schema, std::size_t members, OzaBase base, std::uint64_t seed)
    : n_classes_(schema.n_classes), n_members_(members), base_(base), seed_(seed) {
  if (members == 0) throw std::invalid_argument("Oza ensemble needs at least one member");
}

OzaEnsemble::~OzaEnsemble() = default;
OzaEnsemble::OzaEnsemble(OzaEnsemble&&) noexcept = default;
OzaEnsemble& OzaEnsemble::operator=(OzaEnsemble&&) noexcept = default;

void OzaEnsemble::train(const Dataset& data, const FitObserver& observer) {
  if (data.empty()) return;
  if (observer) observer(data, FitRole::incremental);
  if (!fitted_) {
    prep_.fit(data, false, 0.0);
    const std::size_t d = prep_.output_dim();
    for (std::size_t m = 0; m < n_members_; ++m) {
      if (base_ == OzaBase::hoeffding_tree)
        members_.push_back(std::make_unique<TreeMember>(d, n_classes_));
      else
        members_.push_back(std::make_unique<LogisticMember>(d, n_classes_));
    }
    fitted_ = true;
  } else {
    prep_.update(data);
  }
  std::vector<double> z(prep_.output_dim());
  for (std::size_t i = 0; i < data.size(); ++i) {
    prep_.transform(data.x.row(i), z);
    const std::size_t pos = data.position.empty() ? i : data.position[i];
    for (std::size_t m = 0; m < members_.size(); ++m) {
      const int k = oza_poisson_draw(seed_, pos, m);
      if (k == 0) continue;
      members_[m]->learn(z, data.y[i], k);
      members_[m]->updates += k;
    }
  }
}

std::vector<int> OzaEnsemble::member_predictions(std::span<const double> row) const {
  std::vector<int> out;
  if (!fitted_) return std::vector<int>(n_members_, 0);
  std::vector<double> z(prep_.output_dim()), p(n_classes_);
  prep_.transform(row, z);
  for (const auto& m : members_) {
    m->predict_proba(z, p);
    out.push_back(argmax(p));
  }
  return out;
}

std::vector<int> OzaEnsemble::predict(const Dataset& data) const {
  std::vector<int> out(data.size());
  std::vector<double> votes(n_classes_);
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::fill(votes.begin(), votes.end(), 0.0);
    for (int label : member_predictions(data.x.row(i))) votes[static_cast<std::size_t>(label)] += 1.0;
    out[i] = argmax(votes);
  }
  return out;
}

double OzaEnsemble::member_updates(std::size_t m) const { return m < members_.size() ? members_[m]->updates : 0.0; }

// ---- BLAST --------------------------------------------------------------------

BlastPool::BlastPool(const StreamSchema&, std::uint64_t seed) : seed_(seed) {
  for (LearnerKind kind : all_learner_kinds()) configs_.push_back(default_config(kind));
  accuracies_.assign(configs_.size(), 0.0);
}

std::size_t BlastPool::select(std::span<const double> accuracies) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < accuracies.size(); ++i)
    if (accuracies[i] > accuracies[best]) best = i;
  return best;
}

void BlastPool::pretrain(const Dataset& data, const FitObserver& observer) {
  members_.clear();
  for (std::size_t i = 0; i < configs_.size(); ++i) {
    if (observer) observer(data, FitRole::member);
    members_.push_back(fit_pipeline(configs_[i], data, mix_seed(seed_, i)));
  }
  accuracies_.assign(configs_.size(), 0.0);
  active_ = 0;
}

std::vector<int> BlastPool::step(const Dataset& data, const FitObserver& observer) {
  if (members_.empty()) throw std::logic_error("BLAST pool used before pretraining");
  std::vector<int> out;
  for (std::size_t i = 0; i < members_.size(); ++i) {
    const Predictions p = predict_batch(members_[i], data);
    accuracies_[i] = accuracy(p.labels, data.y);
    if (i == active_) out = p.labels;
  }
  ++updates_;
  for (std::size_t i = 0; i < members_.size(); ++i) {
    const std::uint64_t s = mix_seed(seed_, updates_ * members_.size() + i);
    if (is_incremental(configs_[i].learner)) {
      if (observer) observer(data, FitRole::incremental);
      partial_fit_in_place(members_[i], data, s);
    } else {
      if (observer) observer(data, FitRole::member);
      members_[i] = fit_pipeline(configs_[i], data, s);
    }
  }
  active_ = select(accuracies_);
  return out;
}

// ---- drift-triggered boosting ----------------------------------------------------

GbmBaseline::GbmBaseline(const StreamSchema& schema, const BaselineConfig& config)
    : schema_(schema),
      config_(default_config(LearnerKind::gradient_boosted_trees)),
      seed_(config.seed),
      detector_(config.eddm) {}

void GbmBaseline::pretrain(const Dataset& data, const FitObserver& observer) {
  if (observer) observer(data, FitRole::member);
  model_ = fit_pipeline(config_, data, mix_seed(seed_, 0));
}

GbmBaseline::Step GbmBaseline::step(const Batch& batch, const SlidingWindow& window, std::optional<bool> forced,
                                    const FitObserver& observer) {
  Step out;
  const Dataset test = make_dataset(batch, schema_);
  out.predictions = predict_batch(model_, test).labels;
  if (forced) {
    out.drift = *forced;
  } else {
    for (std::size_t i = 0; i < test.size(); ++i)
      if (eddm_update(detector_, out.predictions[i] == test.y[i], batch.first_position + i) == DriftSignal::drift)
        out.drift = true;
    if (out.drift) detector_.reset();
  }
  if (out.drift) {
    const Dataset data = make_dataset(window, schema_);
    if (observer) observer(data, FitRole::member);
    model_ = fit_pipeline(config_, data, mix_seed(seed_, batch.index));
    out.refit = true;
    ++refits_;
  }
  return out;
}

// ---- run loop -----------------------------------------------------------------

RunLog run_baseline(BaselineKind kind, const std::vector<BatchPtr>& batches, const StreamSchema& schema,
                    const BaselineConfig& config, const RunHooks& hooks, const std::string& run_id) {
  schema.validate();
  config.eddm.validate();
  if (batches.size() < 2) throw std::invalid_argument("run_baseline needs at least 2 batches");
  if (config.window_batches < 1) throw std::invalid_argument("window capacity must be at least 1");

  const std::string code = baseline_code(kind);
  const std::string id = run_id.empty() ? code + "-" + std::to_string(config.seed) : run_id;
  const std::set<std::size_t> preset = config.preset_drifts
                                           ? std::set<std::size_t>(config.preset_drifts->begin(), config.preset_drifts->end())
                                           : std::set<std::size_t>{};

  std::size_t current = batches.front()->index;
  FitObserver observer;
  if (hooks.on_fit) observer = [&](const Dataset& d, FitRole role) { hooks.on_fit(current, d, role); };

  OzaEnsemble oza(schema, config.oza_members, config.oza_base, config.seed);
  BlastPool blast(schema, config.seed);
  GbmBaseline gbm(schema, config);
  SlidingWindow window(config.window_batches);

  const auto t0 = Clock::now();
  const Dataset first = make_dataset(*batches.front(), schema);
  window.push(batches.front());
  switch (kind) {
    case BaselineKind::oza: oza.train(first, observer); break;
    case BaselineKind::blast: blast.pretrain(first, observer); break;
    case BaselineKind::gbm: gbm.pretrain(first, observer); break;
  }
  const double initial_fit = config.record_timings ? seconds_since(t0) : 0.0;

  RunLog log;
  for (std::size_t b = 1; b < batches.size(); ++b) {
    const Batch& batch = *batches[b];
    if (batch.index <= batches[b - 1]->index) throw std::invalid_argument("non-monotonic batch index");
    current = batch.index;
    if (hooks.on_predict) hooks.on_predict(batch.index);
    const Dataset test = make_dataset(batch, schema);
    window.push(batches[b]);

    std::vector<int> labels;
    bool drift = false, retrained = false, changed = false;
    double predict_seconds = 0.0, fit_seconds = 0.0;
    const auto tp = Clock::now();
    switch (kind) {
      case BaselineKind::oza: {
        labels = oza.predict(test);
        predict_seconds = seconds_since(tp);
        const auto tf = Clock::now();
        oza.train(test, observer);
        fit_seconds = seconds_since(tf);
        retrained = true;
        break;
      }
      case BaselineKind::blast: {
        const std::size_t before = blast.active();
        labels = blast.step(test, observer);
        fit_seconds = seconds_since(tp);
        retrained = true;
        changed = blast.active() != before;
        break;
      }
      case BaselineKind::gbm: {
        const std::optional<bool> forced =
            config.preset_drifts ? std::optional<bool>(preset.count(batch.index) > 0) : std::nullopt;
        auto step = gbm.step(batch, window, forced, observer);
        fit_seconds = step.refit ? seconds_since(tp) : 0.0;
        labels = std::move(step.predictions);
        drift = step.drift;
        retrained = step.refit;
        break;
      }
    }
    if (!config.record_timings) predict_seconds = fit_seconds = 0.0;
    log.rows.push_back(RunRow{id, code, "none", config.seed, batch.index, accuracy(labels, test.y), drift, retrained,
                              changed, fit_seconds, predict_seconds});
  }

  auto& m = log.metadata;
  m["run_id"] = id;
  m["strategy"] = code;
  m["paradigm"] = "none";
  m["seed"] = config.seed;
  m["batch_size"] = config.batch_size;
  m["window_batches"] = config.window_batches;
  m["eddm"] = {{"alpha", config.eddm.alpha},
               {"min_errors", config.eddm.min_errors},
               {"warmup_errors", config.eddm.warmup_errors}};
  if (config.preset_drifts) m["preset_drifts"] = *config.preset_drifts;
  if (kind == BaselineKind::oza) {
    m["oza_members"] = config.oza_members;
    m["oza_base"] = config.oza_base == OzaBase::hoeffding_tree ? "hoeffding_tree" : "logistic";
  }
  m["n_batches"] = batches.size();
  m["initial_fit_seconds"] = initial_fit;
  m["software_version"] = kVersion;
  return log;
}

}  // namespace autostream
