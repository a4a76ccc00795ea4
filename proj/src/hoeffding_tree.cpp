#include "hoeffding_tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace autostream {

namespace {

double entropy(std::span<const double> w) {
  double total = 0.0;
  for (double v : w) total += v;
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double v : w)
    if (v > 0.0) h -= v / total * std::log2(v / total);
  return h;
}

}  // namespace

void HoeffdingTree::Gaussian::add(double v, double w) {
  if (weight == 0.0) {
    lo = hi = v;
  } else {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  weight += w;
  const double delta = v - mean;
  mean += w * delta / weight;
  m2 += w * delta * (v - mean);
}

double HoeffdingTree::Gaussian::weight_below(double t) const {
  if (weight <= 0.0) return 0.0;
  if (t < lo) return 0.0;
  if (t >= hi) return weight;
  const double sd = std::sqrt(variance());
  if (sd <= 1e-12) return mean <= t ? weight : 0.0;
  return weight * 0.5 * std::erfc(-(t - mean) / (sd * std::numbers::sqrt2));
}

HoeffdingTree::HoeffdingTree(std::size_t n_features, std::size_t n_classes, HoeffdingParams params)
    : d_(n_features), k_(n_classes), params_(params) {
  nodes_.push_back(make_leaf(0, std::vector<double>(k_, 0.0)));
}

HoeffdingTree::Node HoeffdingTree::make_leaf(int depth, std::vector<double> class_weight) const {
  Node n;
  n.depth = depth;
  n.class_weight = std::move(class_weight);
  n.stats.resize(k_ * d_);
  return n;
}

std::size_t HoeffdingTree::leaf_for(std::span<const double> x) const {
  std::size_t i = 0;
  while (nodes_[i].feature >= 0)
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes_[i].feature)] <= nodes_[i].threshold ? nodes_[i].left
                                                                                                       : nodes_[i].right);
  return i;
}

void HoeffdingTree::learn(std::span<const double> x, int label, double weight) {
  if (weight <= 0.0) return;
  const std::size_t leaf = leaf_for(x);
  Node& n = nodes_[leaf];
  const auto c = static_cast<std::size_t>(label);
  n.class_weight[c] += weight;
  for (std::size_t j = 0; j < d_; ++j) n.stats[c * d_ + j].add(x[j], weight);
  n.since_check += weight;
  if (n.since_check >= params_.grace_period && n.depth < params_.max_depth) {
    n.since_check = 0.0;
    try_split(leaf);
  }
}

void HoeffdingTree::try_split(std::size_t leaf) {
  const Node& n = nodes_[leaf];
  double total = 0.0;
  std::size_t present = 0;
  for (double w : n.class_weight) {
    total += w;
    present += w > 0.0;
  }
  if (present < 2) return;
  const double parent_h = entropy(n.class_weight);

  double best = 0.0, second = 0.0;
  int best_feature = -1;
  double best_threshold = 0.0;
  std::vector<double> left(k_), right(k_);
  for (std::size_t j = 0; j < d_; ++j) {
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (std::size_t c = 0; c < k_; ++c) {
      const Gaussian& g = n.stats[c * d_ + j];
      if (g.weight <= 0.0) continue;
      lo = any ? std::min(lo, g.lo) : g.lo;
      hi = any ? std::max(hi, g.hi) : g.hi;
      any = true;
    }
    if (!any || !(lo < hi)) continue;
    double feature_best = 0.0;
    double feature_threshold = 0.0;
    for (int s = 1; s <= params_.split_points; ++s) {
      const double t = lo + (hi - lo) * s / (params_.split_points + 1);
      double nl = 0.0, nr = 0.0;
      for (std::size_t c = 0; c < k_; ++c) {
        left[c] = n.stats[c * d_ + j].weight_below(t);
        right[c] = n.stats[c * d_ + j].weight - left[c];
        nl += left[c];
        nr += right[c];
      }
      if (nl <= 0.0 || nr <= 0.0) continue;
      const double gain = parent_h - (nl * entropy(left) + nr * entropy(right)) / (nl + nr);
      if (gain > feature_best) {
        feature_best = gain;
        feature_threshold = t;
      }
    }
    if (feature_best > best) {
      second = best;
      best = feature_best;
      best_feature = static_cast<int>(j);
      best_threshold = feature_threshold;
    } else if (feature_best > second) {
      second = feature_best;
    }
  }
  if (best_feature < 0) return;

  const double range = std::log2(static_cast<double>(k_));
  const double eps = std::sqrt(range * range * std::log(1.0 / params_.delta) / (2.0 * total));
  if (!(best - second > eps || eps < params_.tie_threshold)) return;

  const auto f = static_cast<std::size_t>(best_feature);
  std::vector<double> lw(k_), rw(k_);
  for (std::size_t c = 0; c < k_; ++c) {
    lw[c] = n.stats[c * d_ + f].weight_below(best_threshold);
    rw[c] = n.class_weight[c] - lw[c];
  }
  const int depth = n.depth + 1;
  nodes_.push_back(make_leaf(depth, std::move(lw)));
  nodes_.push_back(make_leaf(depth, std::move(rw)));
  Node& parent = nodes_[leaf];
  parent.feature = best_feature;
  parent.threshold = best_threshold;
  parent.left = static_cast<int>(nodes_.size() - 2);
  parent.right = static_cast<int>(nodes_.size() - 1);
  parent.stats.clear();
  parent.stats.shrink_to_fit();
}

void HoeffdingTree::predict_proba(std::span<const double> x, std::span<double> out) const {
  const Node& n = nodes_[leaf_for(x)];
  double total = 0.0;
  bool have_stats = true;
  for (std::size_t c = 0; c < k_; ++c) {
    total += n.class_weight[c];
    if (n.class_weight[c] > 0.0 && n.stats[c * d_].weight <= 0.0) have_stats = false;
  }
  if (total <= 0.0) {
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(k_), 1.0 / static_cast<double>(k_));
    return;
  }
  if (!have_stats) {
    for (std::size_t c = 0; c < k_; ++c) out[c] = n.class_weight[c] / total;
    return;
  }
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k_; ++c) {
    if (n.class_weight[c] <= 0.0) continue;
    double lp = std::log(n.class_weight[c] / total);
    for (std::size_t j = 0; j < d_; ++j) {
      const Gaussian& g = n.stats[c * d_ + j];
      const double var = std::max(g.variance(), 1e-6);
      const double dv = x[j] - g.mean;
      lp -= 0.5 * std::log(2.0 * std::numbers::pi * var) + dv * dv / (2.0 * var);
    }
    out[c] = lp;
    best = std::max(best, lp);
  }
  double sum = 0.0;
  for (std::size_t c = 0; c < k_; ++c) {
    out[c] = n.class_weight[c] > 0.0 ? std::exp(out[c] - best) : 0.0;
    sum += out[c];
  }
  for (std::size_t c = 0; c < k_; ++c) out[c] /= sum;
}

int HoeffdingTree::predict(std::span<const double> x) const {
  std::vector<double> p(k_);
  predict_proba(x, p);
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

std::size_t HoeffdingTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.feature < 0; }));
}

int HoeffdingTree::depth() const {
  int d = 0;
  for (const auto& n : nodes_) d = std::max(d, n.depth);
  return d;
}

}  // namespace autostream
