#include "autostream/runlog.hpp"

#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace autostream {

bool RunRow::same_outcome(const RunRow& o) const {
  return run_id == o.run_id && strategy == o.strategy && paradigm == o.paradigm && seed == o.seed &&
         batch_index == o.batch_index && accuracy == o.accuracy && drift_detected == o.drift_detected &&
         retrained == o.retrained && pipeline_changed == o.pipeline_changed;
}

std::vector<double> RunLog::accuracies() const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.accuracy);
  return out;
}

std::vector<std::size_t> RunLog::drift_batches() const {
  std::vector<std::size_t> out;
  for (const auto& r : rows)
    if (r.drift_detected) out.push_back(r.batch_index);
  return out;
}

std::size_t RunLog::retrain_count() const {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.retrained;
  return n;
}

std::size_t RunLog::pipeline_change_count() const {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.pipeline_changed;
  return n;
}

double RunLog::mean_accuracy() const {
  if (rows.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : rows) sum += r.accuracy;
  return sum / static_cast<double>(rows.size());
}

double RunLog::total_fit_seconds() const {
  double sum = metadata.value("initial_fit_seconds", 0.0);
  for (const auto& r : rows) sum += r.fit_seconds;
  return sum;
}

double RunLog::accuracy_at(std::size_t batch_index) const {
  for (const auto& r : rows)
    if (r.batch_index == batch_index) return r.accuracy;
  throw std::out_of_range("run log has no row for batch " + std::to_string(batch_index));
}

double RunLog::mean_accuracy(std::size_t first, std::size_t last) const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : rows) {
    if (r.batch_index < first || r.batch_index > last) continue;
    sum += r.accuracy;
    ++n;
  }
  if (n == 0) throw std::out_of_range("run log has no rows in the requested batch range");
  return sum / static_cast<double>(n);
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("failed to format number");
  return std::string(buf, ptr);
}

std::string sidecar_path(const std::string& csv_path) {
  const std::string ext = ".csv";
  if (csv_path.size() > ext.size() && csv_path.compare(csv_path.size() - ext.size(), ext.size(), ext) == 0)
    return csv_path.substr(0, csv_path.size() - ext.size()) + ".json";
  return csv_path + ".json";
}

void write_runlog_csv(const RunLog& log, std::ostream& out) {
  out << kRunLogHeader << '\n';
  for (const auto& r : log.rows) {
    out << r.run_id << ',' << r.strategy << ',' << r.paradigm << ',' << r.seed << ',' << r.batch_index << ','
        << format_number(r.accuracy) << ',' << (r.drift_detected ? 1 : 0) << ',' << (r.retrained ? 1 : 0) << ','
        << (r.pipeline_changed ? 1 : 0) << ',' << format_number(r.fit_seconds) << ','
        << format_number(r.predict_seconds) << '\n';
  }
}

void save_runlog(const RunLog& log, const std::string& csv_path) {
  {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + csv_path + "'");
    write_runlog_csv(log, out);
  }
  std::ofstream meta(sidecar_path(csv_path), std::ios::binary);
  if (!meta) throw std::runtime_error("cannot write '" + sidecar_path(csv_path) + "'");
  meta << log.metadata.dump(2) << '\n';
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse(const std::string& s, const char* what) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw std::runtime_error(std::string("run log: bad ") + what + " value '" + s + "'");
  return v;
}

}  // namespace

RunLog load_runlog(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot open '" + csv_path + "'");
  std::string line;
  if (!std::getline(in, line) || line != kRunLogHeader)
    throw std::runtime_error("'" + csv_path + "' is not a run log (header mismatch)");
  RunLog log;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != 11) throw std::runtime_error("run log row with " + std::to_string(c.size()) + " cells");
    RunRow r;
    r.run_id = c[0];
    r.strategy = c[1];
    r.paradigm = c[2];
    r.seed = parse<std::uint64_t>(c[3], "seed");
    r.batch_index = parse<std::size_t>(c[4], "batch_index");
    r.accuracy = parse<double>(c[5], "accuracy");
    r.drift_detected = c[6] == "1";
    r.retrained = c[7] == "1";
    r.pipeline_changed = c[8] == "1";
    r.fit_seconds = parse<double>(c[9], "fit_seconds");
    r.predict_seconds = parse<double>(c[10], "predict_seconds");
    log.rows.push_back(std::move(r));
  }
  std::ifstream meta(sidecar_path(csv_path));
  if (meta) log.metadata = nlohmann::json::parse(meta, nullptr, false);
  if (log.metadata.is_discarded()) log.metadata = nlohmann::json::object();
  return log;
}

}  // namespace autostream
