#include "autostream/learners.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "autostream/random.hpp"
#include "tree.hpp"

namespace autostream {

void Classifier::partial_fit(const Matrix&, std::span<const int>, std::uint64_t) {
  throw std::logic_error("learner not incremental-capable");
}

std::size_t incremental_tree_count(std::size_t n_trees) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(static_cast<double>(n_trees) / 5.0)));
}

int argmax(std::span<const double> values) {
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  return best;
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw std::invalid_argument("accuracy: length mismatch");
  if (truth.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

namespace {

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

void normalize(std::span<double> p) {
  double sum = 0.0;
  for (double v : p) sum += v;
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(p.size()));
    return;
  }
  for (double& v : p) v /= sum;
}

void softmax(std::span<double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

// ---- decision tree -----------------------------------------------------------

class DecisionTreeModel final : public Classifier {
 public:
  explicit DecisionTreeModel(const PipelineConfig& c) {
    params_.max_depth = static_cast<int>(c.number("max_depth", 8));
    params_.min_samples_leaf = static_cast<int>(c.number("min_samples_leaf", 2));
  }
  void fit(const Matrix& x, std::span<const int> y, std::size_t n_classes, std::uint64_t seed) override {
    Rng rng(seed);
    const auto rows = all_rows(x.rows);
    tree_ = Tree::fit_classifier(x, y, n_classes, rows, params_, &rng);
  }
  void predict_proba(std::span<const double> row, std::span<double> out) const override {
    const auto leaf = tree_.leaf(row);
    std::copy(leaf.begin(), leaf.end(), out.begin());
  }
  std::unique_ptr<Classifier> clone() const override { return std::make_unique<DecisionTreeModel>(*this); }
  std::size_t tree_count() const override { return 1; }

 private:
  TreeParams params_;
  Tree tree_;
};

// ---- random forest -----------------------------------------------------------

class RandomForestModel final : public Classifier {
 public:
  explicit RandomForestModel(const PipelineConfig& c)
      : n_trees_(static_cast<std::size_t>(c.number("n_trees", 20))) {
    params_.max_depth = static_cast<int>(c.number("max_depth", 10));
    params_.min_samples_leaf = static_cast<int>(c.number("min_samples_leaf", 2));
  }
  void fit(const Matrix& x, std::span<const int> y, std::size_t n_classes, std::uint64_t seed) override {
    n_classes_ = n_classes;
    trees_.clear();
    grow(x, y, n_trees_, seed);
  }
  void partial_fit(const Matrix& x, std::span<const int> y, std::uint64_t seed) override {
    if (x.rows == 0) return;
    grow(x, y, incremental_tree_count(n_trees_), seed);
  }
  void predict_proba(std::span<const double> row, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
    for (const auto& t : trees_) {
      const auto leaf = t.leaf(row);
      for (std::size_t c = 0; c < n_classes_; ++c) out[c] += leaf[c];
    }
  }
  std::unique_ptr<Classifier> clone() const override { return std::make_unique<RandomForestModel>(*this); }
  std::size_t tree_count() const override { return trees_.size(); }

 private:
  void grow(const Matrix& x, std::span<const int> y, std::size_t count, std::uint64_t seed) {
    TreeParams p = params_;
    p.max_features = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(x.cols)))));
    std::vector<std::size_t> rows(x.rows);
    for (std::size_t t = 0; t < count; ++t) {
      Rng rng(mix_seed(seed, trees_.size()));
      for (auto& r : rows) r = rng.below(x.rows);
      trees_.push_back(Tree::fit_classifier(x, y, n_classes_, rows, p, &rng));
    }
  }

  std::size_t n_trees_;
  std::size_t n_classes_ = 2;
  TreeParams params_;
  std::vector<Tree> trees_;
};

// ---- gradient boosting -----------------------------------------------------

// Binary: one raw score, logistic loss. Multiclass: one score per class,
// softmax loss, one tree per class and stage. Leaves are Newton steps; a stage
// whose step would raise the training loss is halved until it does not.
class GradientBoostingModel final : public Classifier {
 public:
  explicit GradientBoostingModel(const PipelineConfig& c)
      : n_stages_(static_cast<std::size_t>(c.number("n_trees", 50))),
        learning_rate_(c.number("learning_rate", 0.1)) {
    params_.max_depth = static_cast<int>(c.number("max_depth", 3));
    params_.min_samples_leaf = static_cast<int>(c.number("min_samples_leaf", 2));
  }

  void fit(const Matrix& x, std::span<const int> y, std::size_t n_classes, std::uint64_t) override {
    n_classes_ = n_classes;
    width_ = n_classes == 2 ? 1 : n_classes;
    stages_.clear();
    init_.assign(width_, 0.0);
    std::vector<double> prior(n_classes, 0.0);
    for (int label : y) prior[static_cast<std::size_t>(label)] += 1.0;
    for (auto& p : prior) p = std::clamp(p / static_cast<double>(y.size()), 1e-6, 1.0 - 1e-6);
    if (width_ == 1) {
      init_[0] = std::log(prior[1] / (1.0 - prior[1]));
    } else {
      for (std::size_t k = 0; k < width_; ++k) init_[k] = std::log(prior[k]);
    }
    boost(x, y, n_stages_);
  }

  void partial_fit(const Matrix& x, std::span<const int> y, std::uint64_t) override {
    if (x.rows == 0) return;
    boost(x, y, incremental_tree_count(n_stages_));
  }

  void predict_proba(std::span<const double> row, std::span<double> out) const override {
    std::vector<double> f(width_);
    raw(row, stages_.size(), f);
    to_proba(f, out);
  }

  std::unique_ptr<Classifier> clone() const override { return std::make_unique<GradientBoostingModel>(*this); }
  std::size_t tree_count() const override { return stages_.size(); }

  std::vector<double> staged_loss(const Matrix& x, std::span<const int> y) const {
    std::vector<double> scores(x.rows * width_);
    for (std::size_t i = 0; i < x.rows; ++i)
      std::copy(init_.begin(), init_.end(), scores.begin() + static_cast<std::ptrdiff_t>(i * width_));
    std::vector<double> out{mean_loss(scores, y)};
    for (const auto& stage : stages_) {
      for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t k = 0; k < width_; ++k) scores[i * width_ + k] += stage.scale * stage.trees[k].value(x.row(i));
      out.push_back(mean_loss(scores, y));
    }
    return out;
  }

 private:
  struct Stage {
    std::vector<Tree> trees;
    double scale = 0.0;
  };

  void raw(std::span<const double> row, std::size_t n_stages, std::span<double> f) const {
    std::copy(init_.begin(), init_.end(), f.begin());
    for (std::size_t s = 0; s < n_stages; ++s)
      for (std::size_t k = 0; k < width_; ++k) f[k] += stages_[s].scale * stages_[s].trees[k].value(row);
  }

  void to_proba(std::span<const double> f, std::span<double> out) const {
    if (width_ == 1) {
      const double p = 1.0 / (1.0 + std::exp(-f[0]));
      out[0] = 1.0 - p;
      out[1] = p;
      return;
    }
    std::copy(f.begin(), f.end(), out.begin());
    softmax(out.subspan(0, width_));
  }

  double row_loss(std::span<const double> f, int label) const {
    if (width_ == 1) {
      const double m = label == 1 ? f[0] : -f[0];
      return m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
    }
    const double mx = *std::max_element(f.begin(), f.end());
    double sum = 0.0;
    for (double v : f) sum += std::exp(v - mx);
    return mx + std::log(sum) - f[static_cast<std::size_t>(label)];
  }

  double mean_loss(const std::vector<double>& scores, std::span<const int> y) const {
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
      total += row_loss(std::span<const double>(scores.data() + i * width_, width_), y[i]);
    return y.empty() ? 0.0 : total / static_cast<double>(y.size());
  }

  void boost(const Matrix& x, std::span<const int> y, std::size_t count) {
    const std::size_t n = x.rows;
    std::vector<double> scores(n * width_);
    for (std::size_t i = 0; i < n; ++i) raw(x.row(i), stages_.size(), std::span<double>(scores.data() + i * width_, width_));
    double loss = mean_loss(scores, y);

    const auto rows = all_rows(n);
    std::vector<double> target(n), hess(n), proba(n_classes_), trial(n * width_);
    std::vector<double> delta(n * width_);
    const double factor = width_ == 1 ? 1.0 : static_cast<double>(width_ - 1) / static_cast<double>(width_);
    for (std::size_t s = 0; s < count; ++s) {
      Stage stage;
      for (std::size_t k = 0; k < width_; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
          to_proba(std::span<const double>(scores.data() + i * width_, width_), proba);
          const double p = width_ == 1 ? proba[1] : proba[k];
          const double t = (width_ == 1 ? (y[i] == 1) : (y[i] == static_cast<int>(k))) ? 1.0 : 0.0;
          target[i] = factor * (t - p);
          hess[i] = std::max(p * (1.0 - p), 1e-12);
        }
        stage.trees.push_back(Tree::fit_regressor(x, target, hess, rows, params_, nullptr));
        for (std::size_t i = 0; i < n; ++i) delta[i * width_ + k] = stage.trees.back().value(x.row(i));
      }
      double scale = learning_rate_;
      double next = loss;
      for (int halving = 0; halving < 40; ++halving) {
        for (std::size_t j = 0; j < trial.size(); ++j) trial[j] = scores[j] + scale * delta[j];
        next = mean_loss(trial, y);
        if (next <= loss) break;
        scale *= 0.5;
      }
      if (next > loss) {
        scale = 0.0;
        next = loss;
      } else {
        scores.swap(trial);
      }
      stage.scale = scale;
      loss = next;
      stages_.push_back(std::move(stage));
    }
  }

  std::size_t n_stages_;
  double learning_rate_;
  TreeParams params_;
  std::size_t n_classes_ = 2;
  std::size_t width_ = 1;
  std::vector<double> init_;
  std::vector<Stage> stages_;
};

// ---- gaussian naive Bayes ----------------------------------------------------

class GaussianNaiveBayesModel final : public Classifier {
 public:
  explicit GaussianNaiveBayesModel(const PipelineConfig& c) : var_smoothing_(c.number("var_smoothing", 1e-9)) {}

  void fit(const Matrix& x, std::span<const int> y, std::size_t n_classes, std::uint64_t) override {
    const std::size_t d = x.cols;
    n_classes_ = n_classes;
    count_.assign(n_classes, 0.0);
    mean_.assign(n_classes * d, 0.0);
    var_.assign(n_classes * d, 0.0);
    for (std::size_t i = 0; i < x.rows; ++i) {
      const auto c = static_cast<std::size_t>(y[i]);
      count_[c] += 1.0;
      for (std::size_t j = 0; j < d; ++j) mean_[c * d + j] += x(i, j);
    }
    for (std::size_t c = 0; c < n_classes; ++c)
      for (std::size_t j = 0; j < d; ++j)
        if (count_[c] > 0) mean_[c * d + j] /= count_[c];
    for (std::size_t i = 0; i < x.rows; ++i) {
      const auto c = static_cast<std::size_t>(y[i]);
      for (std::size_t j = 0; j < d; ++j) {
        const double dv = x(i, j) - mean_[c * d + j];
        var_[c * d + j] += dv * dv;
      }
    }
    // Smoothing is relative to the largest per-feature variance.
    double max_var = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      double m = 0.0, s = 0.0;
      for (std::size_t i = 0; i < x.rows; ++i) m += x(i, j);
      m /= static_cast<double>(x.rows);
      for (std::size_t i = 0; i < x.rows; ++i) s += (x(i, j) - m) * (x(i, j) - m);
      max_var = std::max(max_var, s / static_cast<double>(x.rows));
    }
    const double eps = std::max(var_smoothing_ * max_var, 1e-12);
    for (std::size_t c = 0; c < n_classes; ++c)
      for (std::size_t j = 0; j < d; ++j)
        var_[c * d + j] = (count_[c] > 0 ? var_[c * d + j] / count_[c] : 0.0) + eps;
    total_ = static_cast<double>(x.rows);
    dim_ = d;
  }

  void predict_proba(std::span<const double> row, std::span<double> out) const override {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n_classes_; ++c) {
      if (count_[c] <= 0) {
        out[c] = -std::numeric_limits<double>::infinity();
        continue;
      }
      double lp = std::log(count_[c] / total_);
      for (std::size_t j = 0; j < dim_; ++j) {
        const double v = var_[c * dim_ + j];
        const double dv = row[j] - mean_[c * dim_ + j];
        lp -= 0.5 * std::log(2.0 * std::numbers::pi * v) + dv * dv / (2.0 * v);
      }
      out[c] = lp;
      best = std::max(best, lp);
    }
    for (std::size_t c = 0; c < n_classes_; ++c) out[c] = count_[c] > 0 ? std::exp(out[c] - best) : 0.0;
  }

  std::unique_ptr<Classifier> clone() const override { return std::make_unique<GaussianNaiveBayesModel>(*this); }

 private:
  double var_smoothing_;
  std::size_t n_classes_ = 2;
  std::size_t dim_ = 0;
  double total_ = 0.0;
  std::vector<double> count_, mean_, var_;
};

// ---- logistic regression by SGD ------------------------------------------------

class LogisticSgdModel final : public Classifier {
 public:
  explicit LogisticSgdModel(const PipelineConfig& c)
      : step_(c.number("learning_rate", 0.01)),
        l2_(c.number("l2", 1e-4)),
        epochs_(static_cast<std::size_t>(c.number("epochs", 10))) {}

  void fit(const Matrix& x, std::span<const int> y, std::size_t n_classes, std::uint64_t seed) override {
    n_classes_ = n_classes;
    dim_ = x.cols;
    weights_.assign(n_classes * (dim_ + 1), 0.0);
    run_epochs(x, y, seed);
  }

  void partial_fit(const Matrix& x, std::span<const int> y, std::uint64_t seed) override {
    if (x.rows == 0) return;
    run_epochs(x, y, seed);
  }

  void predict_proba(std::span<const double> row, std::span<double> out) const override {
    scores(row, out);
    softmax(out.subspan(0, n_classes_));
  }

  std::unique_ptr<Classifier> clone() const override { return std::make_unique<LogisticSgdModel>(*this); }

 private:
  void scores(std::span<const double> row, std::span<double> out) const {
    const std::size_t stride = dim_ + 1;
    for (std::size_t k = 0; k < n_classes_; ++k) {
      const double* w = weights_.data() + k * stride;
      double z = w[dim_];
      for (std::size_t j = 0; j < dim_; ++j) z += w[j] * row[j];
      out[k] = z;
    }
  }

  void run_epochs(const Matrix& x, std::span<const int> y, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::size_t> order = all_rows(x.rows);
    std::vector<double> p(n_classes_);
    const std::size_t stride = dim_ + 1;
    for (std::size_t e = 0; e < epochs_; ++e) {
      rng.shuffle(std::span<std::size_t>(order));
      for (std::size_t i : order) {
        const auto row = x.row(i);
        predict_proba(row, p);
        for (std::size_t k = 0; k < n_classes_; ++k) {
          const double g = p[k] - (y[i] == static_cast<int>(k) ? 1.0 : 0.0);
          double* w = weights_.data() + k * stride;
          for (std::size_t j = 0; j < dim_; ++j) w[j] -= step_ * (g * row[j] + l2_ * w[j]);
          w[dim_] -= step_ * g;
        }
      }
    }
  }

  double step_;
  double l2_;
  std::size_t epochs_;
  std::size_t n_classes_ = 2;
  std::size_t dim_ = 0;
  std::vector<double> weights_;
};

// ---- k nearest neighbours ----------------------------------------------------

class KnnModel final : public Classifier {
 public:
  explicit KnnModel(const PipelineConfig& c)
      : k_(static_cast<std::size_t>(c.number("k", 5))), distance_weighted_(c.text("weights", "uniform") == "distance") {}

  void fit(const Matrix& x, std::span<const int> y, std::size_t n_classes, std::uint64_t) override {
    x_ = x;
    y_.assign(y.begin(), y.end());
    n_classes_ = n_classes;
  }

  void predict_proba(std::span<const double> row, std::span<double> out) const override {
    const std::size_t n = x_.rows;
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      const auto r = x_.row(i);
      for (std::size_t j = 0; j < x_.cols; ++j) {
        const double dv = r[j] - row[j];
        s += dv * dv;
      }
      dist[i] = {s, i};
    }
    const std::size_t k = std::min(k_, n);
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
    std::fill(out.begin(), out.end(), 0.0);
    bool exact = false;
    if (distance_weighted_)
      for (std::size_t i = 0; i < k; ++i) exact = exact || dist[i].first == 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const auto c = static_cast<std::size_t>(y_[dist[i].second]);
      if (!distance_weighted_) {
        out[c] += 1.0;
      } else if (exact) {
        out[c] += dist[i].first == 0.0 ? 1.0 : 0.0;
      } else {
        out[c] += 1.0 / std::sqrt(dist[i].first);
      }
    }
  }

  std::unique_ptr<Classifier> clone() const override { return std::make_unique<KnnModel>(*this); }

 private:
  std::size_t k_;
  bool distance_weighted_;
  Matrix x_;
  std::vector<int> y_;
  std::size_t n_classes_ = 2;
};

}  // namespace

std::unique_ptr<Classifier> make_classifier(const PipelineConfig& config) {
  switch (config.learner) {
    case LearnerKind::decision_tree: return std::make_unique<DecisionTreeModel>(config);
    case LearnerKind::random_forest: return std::make_unique<RandomForestModel>(config);
    case LearnerKind::gradient_boosted_trees: return std::make_unique<GradientBoostingModel>(config);
    case LearnerKind::gaussian_naive_bayes: return std::make_unique<GaussianNaiveBayesModel>(config);
    case LearnerKind::logistic_sgd: return std::make_unique<LogisticSgdModel>(config);
    case LearnerKind::knn: return std::make_unique<KnnModel>(config);
  }
  throw std::invalid_argument("unknown learner kind");
}

// ---- preprocessing -------------------------------------------------------------

void FeaturePipeline::fit(const Dataset& data, bool standardize, double variance_threshold) {
  kinds_ = data.kinds;
  if (kinds_.size() != data.n_features()) kinds_.assign(data.n_features(), FeatureKind::numeric());
  standardize_ = standardize;
  wide_dim_ = 0;
  for (const auto& k : kinds_) wide_dim_ += k.is_categorical() ? k.cardinality : 1;
  rows_seen_ = 0;
  impute_mean_.assign(kinds_.size(), 0.0);
  impute_count_.assign(kinds_.size(), 0.0);
  wide_mean_.assign(wide_dim_, 0.0);
  wide_m2_.assign(wide_dim_, 0.0);
  accumulate(data);

  kept_.clear();
  for (std::size_t j = 0; j < wide_dim_; ++j) {
    const double var = rows_seen_ > 0 ? wide_m2_[j] / static_cast<double>(rows_seen_) : 0.0;
    if (var > variance_threshold) kept_.push_back(j);
  }
  if (kept_.empty()) {
    kept_.resize(wide_dim_);
    std::iota(kept_.begin(), kept_.end(), std::size_t{0});
  }
}

void FeaturePipeline::update(const Dataset& data) {
  if (data.n_features() != kinds_.size()) throw std::invalid_argument("schema mismatch in preprocessing update");
  accumulate(data);
}

void FeaturePipeline::accumulate(const Dataset& data) {
  // Imputation means first, so new rows are expanded with current values.
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto row = data.x.row(i);
    for (std::size_t j = 0; j < kinds_.size(); ++j) {
      if (kinds_[j].is_categorical() || is_missing(row[j])) continue;
      impute_count_[j] += 1.0;
      impute_mean_[j] += (row[j] - impute_mean_[j]) / impute_count_[j];
    }
  }
  std::vector<double> wide;
  for (std::size_t i = 0; i < data.size(); ++i) {
    expand(data.x.row(i), wide);
    ++rows_seen_;
    const auto n = static_cast<double>(rows_seen_);
    for (std::size_t j = 0; j < wide_dim_; ++j) {
      const double delta = wide[j] - wide_mean_[j];
      wide_mean_[j] += delta / n;
      wide_m2_[j] += delta * (wide[j] - wide_mean_[j]);
    }
  }
}

void FeaturePipeline::expand(std::span<const double> raw, std::vector<double>& wide) const {
  wide.assign(wide_dim_, 0.0);
  std::size_t o = 0;
  for (std::size_t j = 0; j < kinds_.size(); ++j) {
    if (kinds_[j].is_categorical()) {
      const double v = raw[j];
      if (!is_missing(v) && v >= 0 && static_cast<std::size_t>(v) < kinds_[j].cardinality)
        wide[o + static_cast<std::size_t>(v)] = 1.0;
      o += kinds_[j].cardinality;
    } else {
      wide[o++] = is_missing(raw[j]) ? impute_mean_[j] : raw[j];
    }
  }
}

void FeaturePipeline::transform(std::span<const double> raw, std::span<double> out) const {
  std::vector<double> wide;
  expand(raw, wide);
  for (std::size_t i = 0; i < kept_.size(); ++i) {
    const std::size_t j = kept_[i];
    double v = wide[j];
    if (standardize_) {
      const double sd = rows_seen_ > 0 ? std::sqrt(wide_m2_[j] / static_cast<double>(rows_seen_)) : 0.0;
      v = (v - wide_mean_[j]) / (sd > 1e-12 ? sd : 1.0);
    }
    out[i] = v;
  }
}

Matrix FeaturePipeline::transform(const Dataset& data) const {
  if (data.n_features() != kinds_.size()) throw std::invalid_argument("schema mismatch: feature count differs from training data");
  Matrix out(data.size(), kept_.size());
  for (std::size_t i = 0; i < data.size(); ++i) transform(data.x.row(i), out.row(i));
  return out;
}

// ---- TrainedModel ----------------------------------------------------------------

TrainedModel::TrainedModel(const TrainedModel& other)
    : config_(other.config_),
      n_classes_(other.n_classes_),
      kinds_(other.kinds_),
      degenerate_(other.degenerate_),
      constant_label_(other.constant_label_),
      training_instances_(other.training_instances_),
      prep_(other.prep_),
      learner_(other.learner_ ? other.learner_->clone() : nullptr) {}

TrainedModel& TrainedModel::operator=(const TrainedModel& other) {
  if (this != &other) {
    TrainedModel copy(other);
    *this = std::move(copy);
  }
  return *this;
}

void TrainedModel::predict_proba(std::span<const double> raw, std::span<double> out) const {
  if (out.size() < n_classes_) throw std::invalid_argument("probability buffer too small");
  auto p = out.subspan(0, n_classes_);
  if (degenerate_ || !learner_) {
    std::fill(p.begin(), p.end(), 0.0);
    p[static_cast<std::size_t>(constant_label_)] = 1.0;
    return;
  }
  std::vector<double> row(prep_.output_dim());
  prep_.transform(raw, row);
  learner_->predict_proba(row, p);
  normalize(p);
}

int TrainedModel::predict(std::span<const double> raw) const {
  std::vector<double> p(n_classes_);
  predict_proba(raw, p);
  return argmax(p);
}

namespace {

void check_labels(const Dataset& data) {
  for (int label : data.y)
    if (label < 0 || static_cast<std::size_t>(label) >= data.n_classes)
      throw std::invalid_argument("label " + std::to_string(label) + " outside [0, n_classes)");
}

std::optional<int> single_class(const Dataset& data) {
  for (int label : data.y)
    if (label != data.y.front()) return std::nullopt;
  return data.y.front();
}

}  // namespace

TrainedModel fit_pipeline(const PipelineConfig& config, const Dataset& data, std::uint64_t seed) {
  if (data.empty()) throw std::invalid_argument("cannot fit a pipeline on empty data");
  check_labels(data);
  TrainedModel m;
  m.config_ = config;
  m.n_classes_ = data.n_classes;
  m.kinds_ = data.kinds.size() == data.n_features() ? data.kinds
                                                    : std::vector<FeatureKind>(data.n_features(), FeatureKind::numeric());
  m.training_instances_ = data.size();
  m.prep_.fit(data, config.preproc_text("standardize", "off") == "on", config.preproc_number("variance_threshold", 0.0));
  m.learner_ = make_classifier(config);
  if (const auto only = single_class(data)) {
    m.degenerate_ = true;
    m.constant_label_ = *only;
    return m;
  }
  const Matrix x = m.prep_.transform(data);
  m.learner_->fit(x, data.y, data.n_classes, seed);
  return m;
}

void partial_fit_in_place(TrainedModel& model, const Dataset& data, std::uint64_t seed) {
  if (!is_incremental(model.config_.learner)) throw std::logic_error("learner not incremental-capable");
  if (data.empty()) return;
  if (data.n_features() != model.n_features()) throw std::invalid_argument("schema mismatch: feature count differs from training data");
  if (data.n_classes != model.n_classes_) throw std::invalid_argument("schema mismatch: class count differs from training data");
  check_labels(data);
  model.prep_.update(data);
  model.training_instances_ += data.size();
  const Matrix x = model.prep_.transform(data);
  if (model.degenerate_) {
    if (const auto only = single_class(data)) {
      model.constant_label_ = *only;
      return;
    }
    model.learner_ = make_classifier(model.config_);
    model.learner_->fit(x, data.y, data.n_classes, seed);
    model.degenerate_ = false;
    return;
  }
  model.learner_->partial_fit(x, data.y, seed);
}

TrainedModel partial_fit(const TrainedModel& model, const Dataset& data, std::uint64_t seed) {
  TrainedModel copy(model);
  partial_fit_in_place(copy, data, seed);
  return copy;
}

Predictions predict_batch(const TrainedModel& model, const Dataset& data) {
  if (data.n_features() != model.n_features())
    throw std::invalid_argument("schema mismatch: batch has " + std::to_string(data.n_features()) +
                                " features, model expects " + std::to_string(model.n_features()));
  Predictions out;
  out.proba = Matrix(data.size(), model.n_classes());
  out.labels.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    model.predict_proba(data.x.row(i), out.proba.row(i));
    out.labels[i] = argmax(out.proba.row(i));
  }
  return out;
}

Predictions predict_batch(const TrainedModel& model, const Batch& batch, const StreamSchema& schema) {
  if (schema.n_features != model.n_features() || schema.n_classes != model.n_classes())
    throw std::invalid_argument("schema mismatch between batch and model");
  return predict_batch(model, make_dataset(batch, schema));
}

double logistic_loss(std::span<const double> weights, const Matrix& x, std::span<const int> y,
                     std::size_t n_classes, double l2, std::span<double> grad) {
  const std::size_t d = x.cols;
  const std::size_t stride = d + 1;
  if (weights.size() != n_classes * stride) throw std::invalid_argument("logistic_loss: weight size mismatch");
  if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
  std::vector<double> z(n_classes);
  double loss = 0.0;
  const auto n = static_cast<double>(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const auto row = x.row(i);
    for (std::size_t k = 0; k < n_classes; ++k) {
      double s = weights[k * stride + d];
      for (std::size_t j = 0; j < d; ++j) s += weights[k * stride + j] * row[j];
      z[k] = s;
    }
    const double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - mx);
    const auto label = static_cast<std::size_t>(y[i]);
    loss += mx + std::log(sum) - z[label];
    if (grad.empty()) continue;
    for (std::size_t k = 0; k < n_classes; ++k) {
      const double g = (std::exp(z[k] - mx) / sum - (k == label ? 1.0 : 0.0)) / n;
      for (std::size_t j = 0; j < d; ++j) grad[k * stride + j] += g * row[j];
      grad[k * stride + d] += g;
    }
  }
  loss /= n;
  for (std::size_t k = 0; k < n_classes; ++k)
    for (std::size_t j = 0; j < d; ++j) {
      const double w = weights[k * stride + j];
      loss += 0.5 * l2 * w * w;
      if (!grad.empty()) grad[k * stride + j] += l2 * w;
    }
  return loss;
}

std::vector<double> staged_log_loss(const TrainedModel& model, const Dataset& data) {
  const auto* gbm = dynamic_cast<const GradientBoostingModel*>(model.learner());
  if (!gbm || model.degenerate()) throw std::invalid_argument("staged_log_loss needs a fitted boosting model");
  return gbm->staged_loss(model.preprocessing().transform(data), data.y);
}

}  // namespace autostream
