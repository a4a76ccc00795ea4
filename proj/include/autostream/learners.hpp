#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "autostream/pipeline_space.hpp"
#include "autostream/stream.hpp"

namespace autostream {

// Uniform learner contract over preprocessed dense rows.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual void fit(const Matrix& x, std::span<const int> y, std::size_t n_classes, std::uint64_t seed) = 0;
  // Only incremental kinds override this; the default throws.
  virtual void partial_fit(const Matrix& x, std::span<const int> y, std::uint64_t seed);
  // Writes n_classes non-negative scores; the caller normalizes.
  virtual void predict_proba(std::span<const double> row, std::span<double> out) const = 0;
  virtual std::unique_ptr<Classifier> clone() const = 0;
  virtual std::size_t tree_count() const { return 0; }
};

std::unique_ptr<Classifier> make_classifier(const PipelineConfig& config);

// impute -> one_hot -> variance_filter -> standardize. Column statistics are
// running (count, mean, M2) so partial_fit can fold in new rows; the column
// masks chosen at fit time stay frozen.
class FeaturePipeline {
 public:
  void fit(const Dataset& data, bool standardize, double variance_threshold);
  void update(const Dataset& data);
  std::size_t input_dim() const { return kinds_.size(); }
  std::size_t output_dim() const { return kept_.size(); }
  void transform(std::span<const double> raw, std::span<double> out) const;
  Matrix transform(const Dataset& data) const;

  // Running imputation means, exposed for leakage audits.
  const std::vector<double>& impute_means() const { return impute_mean_; }
  std::size_t rows_seen() const { return rows_seen_; }

 private:
  void expand(std::span<const double> raw, std::vector<double>& wide) const;
  void accumulate(const Dataset& data);

  std::vector<FeatureKind> kinds_;
  bool standardize_ = false;
  std::size_t rows_seen_ = 0;
  std::vector<double> impute_mean_;
  std::vector<double> impute_count_;
  std::vector<double> wide_mean_;
  std::vector<double> wide_m2_;
  std::vector<std::size_t> kept_;  // indices into the expanded columns
  std::size_t wide_dim_ = 0;
};

class TrainedModel {
 public:
  TrainedModel() = default;
  TrainedModel(const TrainedModel& other);
  TrainedModel& operator=(const TrainedModel& other);
  TrainedModel(TrainedModel&&) noexcept = default;
  TrainedModel& operator=(TrainedModel&&) noexcept = default;

  const PipelineConfig& config() const { return config_; }
  std::size_t n_classes() const { return n_classes_; }
  std::size_t n_features() const { return kinds_.size(); }
  bool degenerate() const { return degenerate_; }
  int constant_label() const { return constant_label_; }
  std::size_t training_instances() const { return training_instances_; }
  std::size_t tree_count() const { return learner_ ? learner_->tree_count() : 0; }
  const FeaturePipeline& preprocessing() const { return prep_; }
  const Classifier* learner() const { return learner_.get(); }

  // Normalized class probabilities for one raw row.
  void predict_proba(std::span<const double> raw, std::span<double> out) const;
  int predict(std::span<const double> raw) const;

 private:
  friend TrainedModel fit_pipeline(const PipelineConfig&, const Dataset&, std::uint64_t);
  friend void partial_fit_in_place(TrainedModel&, const Dataset&, std::uint64_t);

  PipelineConfig config_;
  std::size_t n_classes_ = 2;
  std::vector<FeatureKind> kinds_;
  bool degenerate_ = false;
  int constant_label_ = 0;
  std::size_t training_instances_ = 0;
  FeaturePipeline prep_;
  std::unique_ptr<Classifier> learner_;
};

// Preprocessors are fitted on `data` only. Single-class data yields a
// degenerate constant model; empty data throws.
TrainedModel fit_pipeline(const PipelineConfig& config, const Dataset& data, std::uint64_t seed);

// Incremental update: forests and boosting append trees grown on `data`,
// logistic_sgd continues from its weights. Empty data leaves the model as is.
// Throws "learner not incremental-capable" for other kinds.
void partial_fit_in_place(TrainedModel& model, const Dataset& data, std::uint64_t seed);
TrainedModel partial_fit(const TrainedModel& model, const Dataset& data, std::uint64_t seed);

// Trees (forest) or boosting stages appended per partial_fit call.
std::size_t incremental_tree_count(std::size_t n_trees);

struct Predictions {
  std::vector<int> labels;
  Matrix proba;  // rows x n_classes
};

Predictions predict_batch(const TrainedModel& model, const Dataset& data);
Predictions predict_batch(const TrainedModel& model, const Batch& batch, const StreamSchema& schema);

// Argmax with the lowest index winning ties.
int argmax(std::span<const double> values);
double accuracy(std::span<const int> predicted, std::span<const int> truth);

// ---- numerical hooks ------------------------------------------------------

// Mean softmax cross-entropy plus l2/2 * ||W||^2 (biases excluded) for weights
// laid out as n_classes rows of (n_features + 1), bias last. Writes the
// analytic gradient into `grad` when it is non-empty.
double logistic_loss(std::span<const double> weights, const Matrix& x, std::span<const int> y,
                     std::size_t n_classes, double l2, std::span<double> grad);

// Training log-loss of a boosted model after 0, 1, ..., S stages on `data`.
std::vector<double> staged_log_loss(const TrainedModel& model, const Dataset& data);

}  // namespace autostream
