#include "tree.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "autostream/random.hpp"

namespace autostream {

// Presorted CART growth: every feature keeps its sample positions in sorted
// order and a node owns the same [begin, end) segment in each of them, so a
// split is a stable partition instead of a re-sort.
class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const std::size_t> rows, const TreeParams& params, Rng* rng)
      : x_(x), rows_(rows), params_(params), rng_(rng) {
    if (rows.empty()) throw std::invalid_argument("cannot grow a tree on zero rows");
    const std::size_t d = x.cols;
    order_.resize(d);
    for (std::size_t f = 0; f < d; ++f) {
      auto& ord = order_[f];
      ord.resize(rows.size());
      std::iota(ord.begin(), ord.end(), 0u);
      std::stable_sort(ord.begin(), ord.end(), [&](unsigned a, unsigned b) { return at(a, f) < at(b, f); });
    }
    goes_left_.resize(rows.size());
    buffer_.resize(rows.size());
    features_.resize(d);
    std::iota(features_.begin(), features_.end(), 0u);
  }

  Tree classify(std::span<const int> y, std::size_t n_classes) {
    y_ = y;
    classes_ = n_classes;
    tree_.width_ = n_classes;
    counts_.assign(n_classes, 0.0);
    left_counts_.assign(n_classes, 0.0);
    grow(0, rows_.size(), 0);
    return std::move(tree_);
  }

  Tree regress(std::span<const double> target, std::span<const double> hess) {
    target_ = target;
    hess_ = hess;
    classes_ = 0;
    tree_.width_ = 1;
    grow(0, rows_.size(), 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
  };

  double at(unsigned pos, std::size_t f) const { return x_(rows_[pos], f); }

  std::size_t grow(std::size_t begin, std::size_t end, int depth) {
    const std::size_t id = tree_.nodes_.size();
    tree_.nodes_.emplace_back();
    tree_.depth_ = std::max(tree_.depth_, depth);

    const std::size_t n = end - begin;
    const auto msl = static_cast<std::size_t>(std::max(1, params_.min_samples_leaf));
    Split best;
    if (depth < params_.max_depth && n >= 2 * msl && x_.cols > 0) best = find_split(begin, end, msl);
    if (best.feature < 0) {
      make_leaf(id, begin, end);
      return id;
    }

    std::size_t n_left = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const unsigned pos = order_[0][i];
      goes_left_[pos] = at(pos, static_cast<std::size_t>(best.feature)) <= best.threshold;
      n_left += goes_left_[pos];
    }
    for (auto& ord : order_) {
      std::size_t l = begin;
      std::size_t r = begin + n_left;
      for (std::size_t i = begin; i < end; ++i) {
        const unsigned pos = ord[i];
        buffer_[goes_left_[pos] ? l++ : r++] = pos;
      }
      std::copy(buffer_.begin() + static_cast<std::ptrdiff_t>(begin), buffer_.begin() + static_cast<std::ptrdiff_t>(end),
                ord.begin() + static_cast<std::ptrdiff_t>(begin));
    }

    const std::size_t left = grow(begin, begin + n_left, depth + 1);
    const std::size_t right = grow(begin + n_left, end, depth + 1);
    auto& node = tree_.nodes_[id];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = static_cast<int>(left);
    node.right = static_cast<int>(right);
    return id;
  }

  Split find_split(std::size_t begin, std::size_t end, std::size_t msl) {
    const std::size_t d = x_.cols;
    std::size_t tried = d;
    if (params_.max_features > 0 && static_cast<std::size_t>(params_.max_features) < d && rng_) {
      tried = static_cast<std::size_t>(params_.max_features);
      for (std::size_t i = 0; i < tried; ++i) std::swap(features_[i], features_[i + rng_->below(d - i)]);
    } else {
      std::iota(features_.begin(), features_.end(), 0u);
    }
    const std::size_t n = end - begin;

    // Node totals.
    double total_sum = 0.0;
    double total_sq = 0.0;
    if (classes_ > 0) {
      std::fill(counts_.begin(), counts_.end(), 0.0);
      for (std::size_t i = begin; i < end; ++i) counts_[static_cast<std::size_t>(y_[rows_[order_[0][i]]])] += 1.0;
      for (double c : counts_) total_sq += c * c;
    } else {
      for (std::size_t i = begin; i < end; ++i) total_sum += target_[rows_[order_[0][i]]];
    }
    const double parent = classes_ > 0 ? total_sq / static_cast<double>(n)
                                       : total_sum * total_sum / static_cast<double>(n);

    Split best;
    for (std::size_t t = 0; t < tried; ++t) {
      const std::size_t f = features_[t];
      const auto& ord = order_[f];
      if (at(ord[begin], f) == at(ord[end - 1], f)) continue;
      double sq_left = 0.0;
      double sq_right = total_sq;
      double sum_left = 0.0;
      if (classes_ > 0) std::fill(left_counts_.begin(), left_counts_.end(), 0.0);
      for (std::size_t i = begin; i + 1 < end; ++i) {
        const unsigned pos = ord[i];
        if (classes_ > 0) {
          const auto c = static_cast<std::size_t>(y_[rows_[pos]]);
          const double right_c = counts_[c] - left_counts_[c];
          sq_left += 2.0 * left_counts_[c] + 1.0;
          sq_right -= 2.0 * right_c - 1.0;
          left_counts_[c] += 1.0;
        } else {
          sum_left += target_[rows_[pos]];
        }
        const std::size_t n_left = i - begin + 1;
        const std::size_t n_right = n - n_left;
        if (n_left < msl) continue;
        if (n_right < msl) break;
        const double v = at(pos, f);
        const double v_next = at(ord[i + 1], f);
        if (!(v < v_next)) continue;
        double score;
        if (classes_ > 0) {
          score = sq_left / static_cast<double>(n_left) + sq_right / static_cast<double>(n_right);
        } else {
          const double sum_right = total_sum - sum_left;
          score = sum_left * sum_left / static_cast<double>(n_left) + sum_right * sum_right / static_cast<double>(n_right);
        }
        const double gain = score - parent;
        if (gain > best.gain + 1e-12) {
          double mid = v + (v_next - v) * 0.5;
          if (!(mid < v_next)) mid = v;
          best = {static_cast<int>(f), mid, gain};
        }
      }
    }
    return best;
  }

  void make_leaf(std::size_t id, std::size_t begin, std::size_t end) {
    auto& payload = tree_.payload_;
    tree_.nodes_[id].payload = payload.size();
    const auto n = static_cast<double>(end - begin);
    if (classes_ > 0) {
      const std::size_t off = payload.size();
      payload.resize(off + classes_, 0.0);
      for (std::size_t i = begin; i < end; ++i) payload[off + static_cast<std::size_t>(y_[rows_[order_[0][i]]])] += 1.0;
      for (std::size_t c = 0; c < classes_; ++c) payload[off + c] /= n;
      return;
    }
    double sum = 0.0;
    double denom = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t r = rows_[order_[0][i]];
      sum += target_[r];
      denom += hess_.empty() ? 1.0 : hess_[r];
    }
    payload.push_back(denom > 1e-12 ? sum / denom : 0.0);
  }

  const Matrix& x_;
  std::span<const std::size_t> rows_;
  TreeParams params_;
  Rng* rng_;
  std::span<const int> y_;
  std::span<const double> target_;
  std::span<const double> hess_;
  std::size_t classes_ = 0;

  std::vector<std::vector<unsigned>> order_;
  std::vector<char> goes_left_;
  std::vector<unsigned> buffer_;
  std::vector<unsigned> features_;
  std::vector<double> counts_;
  std::vector<double> left_counts_;
  Tree tree_;
};

Tree Tree::fit_classifier(const Matrix& x, std::span<const int> y, std::size_t n_classes,
                          std::span<const std::size_t> rows, const TreeParams& params, Rng* rng) {
  return TreeBuilder(x, rows, params, rng).classify(y, n_classes);
}

Tree Tree::fit_regressor(const Matrix& x, std::span<const double> target, std::span<const double> hess,
                         std::span<const std::size_t> rows, const TreeParams& params, Rng* rng) {
  return TreeBuilder(x, rows, params, rng).regress(target, hess);
}

std::span<const double> Tree::leaf(std::span<const double> row) const {
  std::size_t i = 0;
  while (nodes_[i].feature >= 0) {
    const Node& n = nodes_[i];
    i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return {payload_.data() + nodes_[i].payload, width_};
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.feature < 0; }));
}

bool Tree::operator==(const Tree& other) const {
  return nodes_ == other.nodes_ && payload_ == other.payload_ && width_ == other.width_;
}

}  // namespace autostream
