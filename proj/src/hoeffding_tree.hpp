#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace autostream {

struct HoeffdingParams {
  double grace_period = 200.0;
  double delta = 1e-7;
  double tie_threshold = 0.05;
  int max_depth = 6;
  int split_points = 10;  // candidate thresholds per feature
};

// Incremental decision tree with per-class Gaussian estimators for numeric
// features. Leaves predict with naive Bayes once they hold statistics.
class HoeffdingTree {
 public:
  HoeffdingTree(std::size_t n_features, std::size_t n_classes, HoeffdingParams params = {});

  void learn(std::span<const double> x, int label, double weight = 1.0);
  void predict_proba(std::span<const double> x, std::span<double> out) const;
  int predict(std::span<const double> x) const;

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t leaf_count() const;
  int depth() const;

 private:
  struct Gaussian {
    double weight = 0.0;
    double mean = 0.0;
    double m2 = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    void add(double v, double w);
    double variance() const { return weight > 0.0 ? m2 / weight : 0.0; }
    double weight_below(double t) const;
  };

  struct Node {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int depth = 0;
    std::vector<double> class_weight;
    std::vector<Gaussian> stats;  // class-major: stats[c * d + j]
    double since_check = 0.0;
  };

  std::size_t leaf_for(std::span<const double> x) const;
  void try_split(std::size_t leaf);
  Node make_leaf(int depth, std::vector<double> class_weight) const;

  std::size_t d_;
  std::size_t k_;
  HoeffdingParams params_;
  std::vector<Node> nodes_;
};

}  // namespace autostream
