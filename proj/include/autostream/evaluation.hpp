#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "autostream/adaptation.hpp"
#include "autostream/baselines.hpp"
#include "autostream/cash.hpp"
#include "autostream/generators.hpp"
#include "autostream/runlog.hpp"
#include "json.hpp"

namespace autostream {

struct ChunkResult {
  double accuracy = 0.0;
  std::vector<std::uint8_t> correct;  // 1 per correctly predicted row
};

// Scores one batch without touching the model. Throws on an empty batch.
ChunkResult evaluate_chunk(std::span<const int> predicted, std::span<const int> truth);
ChunkResult evaluate_chunk(const EnsembleModel& model, const Dataset& batch);
ChunkResult evaluate_chunk(const TrainedModel& model, const Dataset& batch);

struct RecoveryOptions {
  std::size_t lookback = 40;       // batches before the drift forming the reference mean
  std::size_t moving_window = 5;   // forward moving average length
  double tolerance = 0.02;         // accuracy points, as a fraction
};

// Mean accuracy over the `lookback` batches preceding `drift_batch`.
double pre_drift_mean(const RunLog& log, std::size_t drift_batch, std::size_t lookback = 40);

// Batches after the reference point (first drift flag at or after
// `drift_batch`, else `drift_batch` itself) until the forward moving average
// climbs back to the pre-drift mean minus the tolerance. nullopt = never.
std::optional<std::size_t> recovery_time(const RunLog& log, std::size_t drift_batch,
                                         const RecoveryOptions& options = {});
// First flagged batch at or after `drift_batch`, if any.
std::optional<std::size_t> first_flag_after(const RunLog& log, std::size_t drift_batch);

struct RunSummary {
  std::string run_id;
  std::string label;
  std::string strategy;
  std::string paradigm;
  std::uint64_t seed = 0;
  std::size_t batches = 0;
  double mean_accuracy = 0.0;
  std::vector<std::size_t> true_drifts;
  std::vector<std::optional<std::size_t>> recovery;  // one per true drift
  std::size_t retrains = 0;
  std::size_t drifts_flagged = 0;
  std::size_t pipeline_changes = 0;
  double total_fit_seconds = 0.0;

  // "never", a batch count, or "n/a" without drifts; ';'-joined.
  std::string recovery_text() const;
};

// True drift batches come from the log metadata ("true_drift_batches") when
// not given explicitly.
RunSummary summarize(const RunLog& log, std::optional<std::vector<std::size_t>> true_drifts = std::nullopt,
                     const RecoveryOptions& options = {});

// ---- streams ---------------------------------------------------------------

// A generated stream description or an ingested CSV file.
struct StreamSource {
  Family family = Family::sea;
  std::size_t n = 100000;
  DriftKind drift = DriftKind::abrupt;
  std::size_t center = 50000;
  std::size_t width = 1;
  int magnitude = 4;
  double noise = 0.0;
  std::optional<std::string> csv_path;
  std::optional<std::string> label_column;

  void validate(std::vector<std::string>& errors) const;
  std::string describe() const;
};

struct LoadedStream {
  StreamSchema schema;
  std::vector<Instance> instances;
  std::vector<std::size_t> drift_positions;  // instance units; empty for files without a sidecar
};

LoadedStream load_stream(const StreamSource& source, std::uint64_t seed);
// Writes the CSV plus `<path minus .csv>.json` holding the schema, seed,
// drift spec and ground-truth drift positions.
LoadedStream write_generated_stream(const std::string& csv_path, const StreamSource& source, std::uint64_t seed,
                                    std::size_t batch_size = 1000);
nlohmann::json to_json(const DriftSpec& spec);
nlohmann::json to_json(const StreamSource& source);
StreamSource stream_source_from_json(const nlohmann::json& j);

// ---- single runs --------------------------------------------------------------

// Strategy codes T1..PRS run the orchestrator; OZA, BLAST and GBM run baselines.
bool is_baseline_name(const std::string& name);

struct RunRequest {
  std::string method = "T1";
  OrchestratorConfig orchestrator;
  std::size_t oza_members = 10;
};

// Runs one method over a prepared stream and records the ground truth and
// the stream description in the metadata.
RunLog run_method(const RunRequest& request, const LoadedStream& stream, const std::string& run_id,
                  const nlohmann::json& stream_meta = nlohmann::json::object(), const RunHooks& hooks = {});

// ---- sweeps ----------------------------------------------------------------------

enum class SweepAxis { strategy, magnitude_level, time_budget, stacker_kind };
std::string to_string(SweepAxis axis);
SweepAxis sweep_axis_from_string(const std::string& name);

struct SweepSpec {
  std::string id = "sweep";
  SweepAxis axis = SweepAxis::strategy;
  std::vector<std::string> values;
  std::size_t seeds = 1;
  std::uint64_t master_seed = 0;
  StreamSource stream;
  RunRequest base;  // method and orchestrator settings for the fixed axes

  // Lists every violation.
  void validate() const;
};

nlohmann::json to_json(const SweepSpec& spec);
SweepSpec sweep_spec_from_json(const nlohmann::json& j);

// Stream seed depends on the seed index only, so every axis value sees the
// same stream; model seeds also mix in the axis value.
std::uint64_t sweep_stream_seed(std::uint64_t master_seed, std::size_t seed_index);
std::uint64_t sweep_run_seed(std::uint64_t master_seed, const std::string& value, std::size_t seed_index);
std::string sweep_run_id(const SweepSpec& spec, const std::string& value, std::size_t seed_index);

struct SweepRun {
  std::string run_id;
  std::string value;
  std::size_t seed_index = 0;
  std::optional<RunLog> log;  // empty on failure
  std::string error;
  bool resumed = false;
};

struct SweepResult {
  std::string directory;
  std::vector<SweepRun> runs;  // value-major, seed-minor order
  std::size_t failures() const;
  std::vector<RunLog> logs() const;
};

// Runs the full cartesian product into `<root>/<spec.id>/`. Existing
// complete run files are loaded instead of recomputed; a failing run is
// recorded and the sweep continues.
SweepResult run_sweep(const SweepSpec& spec, const std::string& root, std::size_t jobs = 1);

// ---- reports -----------------------------------------------------------------

struct ReportOptions {
  RecoveryOptions recovery;
  std::string title;
};

// Writes `<dir>/plots/<stream>.svg` (one line chart per stream group) and
// `<dir>/summary.csv`. Output bytes depend only on the logs.
std::vector<RunSummary> render_report(const std::vector<RunLog>& logs, const std::string& dir,
                                      const ReportOptions& options = {});
std::string render_svg(const std::vector<const RunLog*>& logs, const std::string& title);
void write_summary_csv(const std::vector<RunSummary>& summaries, std::ostream& out);

}  // namespace autostream
