#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "autostream/stream.hpp"

namespace autostream {

class Rng;

struct TreeParams {
  int max_depth = 8;
  int min_samples_leaf = 2;
  int max_features = 0;  // features tried per split; 0 = all
};

// Binary CART tree over dense numeric rows. Leaves carry a fixed-width payload:
// class fractions for classification, one value for regression.
class Tree {
 public:
  // Gini splits; leaf payload is the class distribution of its samples.
  // `rows` may repeat indices (bootstrap).
  static Tree fit_classifier(const Matrix& x, std::span<const int> y, std::size_t n_classes,
                             std::span<const std::size_t> rows, const TreeParams& params, Rng* rng);

  // Squared-error splits on `target`. Leaf value is sum(target) / sum(hess)
  // when `hess` is non-empty (a Newton step), the mean otherwise.
  static Tree fit_regressor(const Matrix& x, std::span<const double> target, std::span<const double> hess,
                            std::span<const std::size_t> rows, const TreeParams& params, Rng* rng);

  std::span<const double> leaf(std::span<const double> row) const;
  double value(std::span<const double> row) const { return leaf(row)[0]; }

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t leaf_count() const;
  int depth() const { return depth_; }
  std::size_t width() const { return width_; }

  bool operator==(const Tree& other) const;

 private:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::size_t payload = 0;
    bool operator==(const Node&) const = default;
  };

  friend class TreeBuilder;
  std::vector<Node> nodes_;
  std::vector<double> payload_;
  std::size_t width_ = 1;
  int depth_ = 0;
};

}  // namespace autostream
