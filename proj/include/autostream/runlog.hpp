#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace autostream {

inline constexpr const char* kRunLogHeader =
    "run_id,strategy,paradigm,seed,batch_index,accuracy,drift_detected,retrained,pipeline_changed,fit_seconds,"
    "predict_seconds";

struct RunRow {
  std::string run_id;
  std::string strategy;
  std::string paradigm;
  std::uint64_t seed = 0;
  std::size_t batch_index = 0;
  double accuracy = 0.0;
  bool drift_detected = false;
  bool retrained = false;
  bool pipeline_changed = false;
  double fit_seconds = 0.0;
  double predict_seconds = 0.0;

  // Equality over every column except the two timing columns.
  bool same_outcome(const RunRow& other) const;
};

// One row per tested batch plus free-form run metadata (stream, config,
// version), stored in a JSON sidecar next to the CSV.
struct RunLog {
  std::vector<RunRow> rows;
  nlohmann::json metadata = nlohmann::json::object();

  std::string run_id() const { return rows.empty() ? metadata.value("run_id", "") : rows.front().run_id; }
  std::vector<double> accuracies() const;
  // Batch indices flagged as drift.
  std::vector<std::size_t> drift_batches() const;
  std::size_t retrain_count() const;
  std::size_t pipeline_change_count() const;
  double mean_accuracy() const;
  double total_fit_seconds() const;
  // Accuracy of the row for `batch_index`; throws when absent.
  double accuracy_at(std::size_t batch_index) const;
  // Mean accuracy over batch indices [first, last]; rows outside the log are skipped.
  double mean_accuracy(std::size_t first, std::size_t last) const;
};

void write_runlog_csv(const RunLog& log, std::ostream& out);
// Writes `<path>` (CSV) and `<path minus .csv>.json` (metadata).
void save_runlog(const RunLog& log, const std::string& csv_path);
RunLog load_runlog(const std::string& csv_path);

std::string format_number(double v);
std::string sidecar_path(const std::string& csv_path);

}  // namespace autostream
