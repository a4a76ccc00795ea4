#include "autostream/stream.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace autostream {

StreamSchema StreamSchema::numeric(std::size_t n_features, std::size_t n_classes) {
  StreamSchema schema;
  schema.n_features = n_features;
  schema.n_classes = n_classes;
  schema.feature_kinds.assign(n_features, FeatureKind::numeric());
  schema.category_names.assign(n_features, {});
  for (std::size_t j = 0; j < n_features; ++j) schema.feature_names.push_back("x" + std::to_string(j));
  for (std::size_t c = 0; c < n_classes; ++c) schema.class_names.push_back(std::to_string(c));
  return schema;
}

void StreamSchema::validate() const {
  if (n_classes < 2) throw std::invalid_argument("schema needs at least 2 classes");
  if (feature_kinds.size() != n_features)
    throw std::invalid_argument("schema feature_kinds length differs from n_features");
  for (std::size_t j = 0; j < feature_kinds.size(); ++j) {
    if (feature_kinds[j].is_categorical() && feature_kinds[j].cardinality < 2)
      throw std::invalid_argument("categorical feature " + std::to_string(j) +
                                  " has cardinality below 2");
  }
}

bool StreamSchema::has_categorical() const {
  return std::any_of(feature_kinds.begin(), feature_kinds.end(),
                     [](const FeatureKind& k) { return k.is_categorical(); });
}

void check_instance(const Instance& instance, const StreamSchema& schema) {
  if (instance.features.size() != schema.n_features)
    throw std::invalid_argument("instance has " + std::to_string(instance.features.size()) +
                                " features, schema declares " + std::to_string(schema.n_features));
  if (instance.label < 0 || static_cast<std::size_t>(instance.label) >= schema.n_classes)
    throw std::invalid_argument("instance label " + std::to_string(instance.label) +
                                " outside [0, " + std::to_string(schema.n_classes) + ")");
}

std::vector<BatchPtr> batchify(std::span<const Instance> stream, std::size_t batch_size) {
  if (stream.empty()) throw std::invalid_argument("empty stream");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be at least 1");
  if (stream.size() < batch_size)
    throw std::invalid_argument("stream shorter than one batch (" + std::to_string(stream.size()) +
                                " < " + std::to_string(batch_size) + ")");
  std::vector<BatchPtr> batches;
  std::size_t start = 0;
  while (start < stream.size()) {
    const std::size_t len = std::min(batch_size, stream.size() - start);
    if (len < batch_size && 2 * len < batch_size) break;
    auto batch = std::make_shared<Batch>();
    batch->index = batches.size();
    batch->first_position = start;
    batch->instances.assign(stream.begin() + static_cast<std::ptrdiff_t>(start),
                            stream.begin() + static_cast<std::ptrdiff_t>(start + len));
    batches.push_back(std::move(batch));
    start += len;
  }
  return batches;
}

SlidingWindow::SlidingWindow(std::size_t capacity_batches) : capacity_(capacity_batches) {
  if (capacity_ < 1) throw std::invalid_argument("window capacity must be at least 1");
}

void SlidingWindow::push(BatchPtr batch) {
  if (!batch) throw std::invalid_argument("null batch");
  if (last_index_ && batch->index <= *last_index_)
    throw std::invalid_argument("non-monotonic batch index");
  last_index_ = batch->index;
  contents_.push_back(std::move(batch));
  while (contents_.size() > capacity_) contents_.pop_front();
}

std::size_t SlidingWindow::total_instances() const {
  std::size_t n = 0;
  for (const auto& b : contents_) n += b->size();
  return n;
}

std::vector<std::size_t> SlidingWindow::indices() const {
  std::vector<std::size_t> out;
  for (const auto& b : contents_) out.push_back(b->index);
  return out;
}

SlidingWindow window_push(SlidingWindow window, BatchPtr batch) {
  window.push(std::move(batch));
  return window;
}

Dataset Dataset::slice(std::size_t begin, std::size_t end) const {
  end = std::min(end, size());
  begin = std::min(begin, end);
  Dataset out;
  out.n_classes = n_classes;
  out.kinds = kinds;
  out.x = Matrix(end - begin, x.cols);
  std::copy(x.data.begin() + static_cast<std::ptrdiff_t>(begin * x.cols),
            x.data.begin() + static_cast<std::ptrdiff_t>(end * x.cols), out.x.data.begin());
  out.y.assign(y.begin() + static_cast<std::ptrdiff_t>(begin), y.begin() + static_cast<std::ptrdiff_t>(end));
  out.source_batch.assign(source_batch.begin() + static_cast<std::ptrdiff_t>(begin),
                          source_batch.begin() + static_cast<std::ptrdiff_t>(end));
  if (position.size() == size())
    out.position.assign(position.begin() + static_cast<std::ptrdiff_t>(begin),
                        position.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

std::optional<std::size_t> Dataset::max_source_batch() const {
  if (source_batch.empty()) return std::nullopt;
  return *std::max_element(source_batch.begin(), source_batch.end());
}

namespace {

Dataset empty_dataset(std::size_t n_rows, const StreamSchema& schema) {
  Dataset data;
  data.n_classes = schema.n_classes;
  data.kinds = schema.feature_kinds;
  data.x = Matrix(n_rows, schema.n_features);
  data.y.reserve(n_rows);
  data.source_batch.reserve(n_rows);
  data.position.reserve(n_rows);
  return data;
}

void append_batch(Dataset& data, const Batch& batch, const StreamSchema& schema) {
  const std::size_t start = data.position.size();
  for (const auto& inst : batch.instances) {
    if (inst.features.size() != schema.n_features)
      throw std::invalid_argument("schema mismatch: instance has " +
                                  std::to_string(inst.features.size()) + " features, expected " +
                                  std::to_string(schema.n_features));
    std::copy(inst.features.begin(), inst.features.end(), data.x.row(data.y.size()).begin());
    data.y.push_back(inst.label);
    data.source_batch.push_back(batch.index);
    data.position.push_back(batch.first_position + data.position.size() - start);
  }
}

}  // namespace

Dataset make_dataset(std::span<const BatchPtr> batches, const StreamSchema& schema) {
  std::size_t n = 0;
  for (const auto& b : batches) n += b->size();
  Dataset data = empty_dataset(n, schema);
  for (const auto& b : batches) append_batch(data, *b, schema);
  return data;
}

Dataset make_dataset(const Batch& batch, const StreamSchema& schema) {
  Dataset data = empty_dataset(batch.size(), schema);
  append_batch(data, batch, schema);
  return data;
}

Dataset make_dataset(const SlidingWindow& window, const StreamSchema& schema) {
  const auto contents = window.contents();
  return make_dataset(std::span<const BatchPtr>(contents), schema);
}

std::pair<Dataset, Dataset> temporal_split(const Dataset& data, double holdout_fraction) {
  if (holdout_fraction <= 0.0 || holdout_fraction >= 1.0)
    throw std::invalid_argument("holdout fraction must lie in (0, 1)");
  const std::size_t n = data.size();
  std::size_t n_holdout = static_cast<std::size_t>(std::lround(static_cast<double>(n) * holdout_fraction));
  if (n >= 2) n_holdout = std::clamp<std::size_t>(n_holdout, 1, n - 1);
  else n_holdout = 0;
  const std::size_t cut = n - n_holdout;
  return {data.slice(0, cut), data.slice(cut, n)};
}

}  // namespace autostream
