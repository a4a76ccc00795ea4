#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace autostream {

// Marker for a missing numeric value; removed by the impute preprocessor.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return std::isnan(v); }

// Code for a category value that was not seen when the encoding was frozen.
inline constexpr double kUnknownCategory = -1.0;

enum class FeatureType { numeric, categorical };

struct FeatureKind {
  FeatureType type = FeatureType::numeric;
  std::size_t cardinality = 0;  // categorical only

  static FeatureKind numeric() { return {}; }
  static FeatureKind categorical(std::size_t cardinality) {
    return {FeatureType::categorical, cardinality};
  }
  bool is_categorical() const { return type == FeatureType::categorical; }
  bool operator==(const FeatureKind&) const = default;
};

struct StreamSchema {
  std::size_t n_features = 0;
  std::size_t n_classes = 2;
  std::vector<FeatureKind> feature_kinds;
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;
  // Per-feature category labels in code order; empty for numeric features.
  std::vector<std::vector<std::string>> category_names;

  static StreamSchema numeric(std::size_t n_features, std::size_t n_classes);

  void validate() const;
  bool has_categorical() const;
};

struct Instance {
  std::vector<double> features;
  int label = 0;
};

// Checks feature dimension and label range against the schema.
void check_instance(const Instance& instance, const StreamSchema& schema);

struct Batch {
  std::size_t index = 0;
  // Stream position of the first instance; positions are global instance
  // ordinals and feed the drift detector.
  std::size_t first_position = 0;
  std::vector<Instance> instances;

  std::size_t size() const { return instances.size(); }
};

using BatchPtr = std::shared_ptr<const Batch>;

// Splits a stream into equal batches. A trailing remainder shorter than half
// a batch is dropped; a longer one is kept as a short final batch.
std::vector<BatchPtr> batchify(std::span<const Instance> stream, std::size_t batch_size);

// Bounded FIFO of the most recent batches; the forgetting mechanism.
class SlidingWindow {
 public:
  explicit SlidingWindow(std::size_t capacity_batches = 3);

  // Throws on a batch whose index is not above everything already held.
  void push(BatchPtr batch);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return contents_.size(); }
  bool empty() const { return contents_.empty(); }
  std::size_t total_instances() const;
  std::vector<std::size_t> indices() const;
  std::vector<BatchPtr> contents() const { return {contents_.begin(), contents_.end()}; }

 private:
  std::size_t capacity_;
  std::deque<BatchPtr> contents_;
  std::optional<std::size_t> last_index_;
};

SlidingWindow window_push(SlidingWindow window, BatchPtr batch);

// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

// Materialized training or test view. Every row remembers the batch it came
// from so that fit calls can be audited for test-then-train purity.
struct Dataset {
  Matrix x;
  std::vector<int> y;
  std::vector<std::size_t> source_batch;
  std::vector<std::size_t> position;  // global stream position per row
  std::size_t n_classes = 2;
  std::vector<FeatureKind> kinds;

  std::size_t size() const { return y.size(); }
  bool empty() const { return y.empty(); }
  std::size_t n_features() const { return x.cols; }

  Dataset slice(std::size_t begin, std::size_t end) const;
  // Largest source batch index present, if any rows exist.
  std::optional<std::size_t> max_source_batch() const;
};

Dataset make_dataset(std::span<const BatchPtr> batches, const StreamSchema& schema);
Dataset make_dataset(const Batch& batch, const StreamSchema& schema);
Dataset make_dataset(const SlidingWindow& window, const StreamSchema& schema);

// Order-preserving split: the holdout is the most recent fraction of rows.
std::pair<Dataset, Dataset> temporal_split(const Dataset& data, double holdout_fraction = 0.25);

// ---- CSV ingestion / export ------------------------------------------------

struct SchemaHints {
  std::optional<std::string> label_column;  // default: last column
  // When set, category and label encodings are frozen to this schema:
  // unseen categories become kUnknownCategory, unseen labels are an error.
  std::optional<StreamSchema> fixed_schema;
};

struct IngestResult {
  StreamSchema schema;
  std::vector<Instance> instances;
};

IngestResult ingest_csv(const std::string& path, const SchemaHints& hints = {});

// Writes a header row plus one row per instance; numeric values use the
// shortest round-trip representation, categorical values their names.
void export_csv(const std::string& path, const StreamSchema& schema,
                std::span<const Instance> instances);

}  // namespace autostream
