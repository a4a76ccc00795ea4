#include "autostream/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "autostream/random.hpp"

namespace fs = std::filesystem;

namespace autostream {

// ---- chunk scoring -----------------------------------------------------------------

ChunkResult evaluate_chunk(std::span<const int> predicted, std::span<const int> truth) {
  if (truth.empty()) throw std::invalid_argument("evaluate_chunk: empty batch");
  if (predicted.size() != truth.size()) throw std::invalid_argument("evaluate_chunk: prediction count mismatch");
  ChunkResult r;
  r.correct.resize(truth.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    r.correct[i] = predicted[i] == truth[i];
    hits += r.correct[i];
  }
  r.accuracy = static_cast<double>(hits) / static_cast<double>(truth.size());
  return r;
}

ChunkResult evaluate_chunk(const EnsembleModel& model, const Dataset& batch) {
  if (batch.empty()) throw std::invalid_argument("evaluate_chunk: empty batch");
  return evaluate_chunk(model.predict(batch).labels, batch.y);
}

ChunkResult evaluate_chunk(const TrainedModel& model, const Dataset& batch) {
  if (batch.empty()) throw std::invalid_argument("evaluate_chunk: empty batch");
  return evaluate_chunk(predict_batch(model, batch).labels, batch.y);
}

// ---- recovery -------------------------------------------------------------------------

double pre_drift_mean(const RunLog& log, std::size_t drift_batch, std::size_t lookback) {
  if (drift_batch < 2) throw std::invalid_argument("pre_drift_mean: no tested batches before the drift");
  const std::size_t first = drift_batch > lookback ? drift_batch - lookback : 1;
  return log.mean_accuracy(first, drift_batch - 1);
}

std::optional<std::size_t> first_flag_after(const RunLog& log, std::size_t drift_batch) {
  for (const auto& r : log.rows)
    if (r.drift_detected && r.batch_index >= drift_batch) return r.batch_index;
  return std::nullopt;
}

std::optional<std::size_t> recovery_time(const RunLog& log, std::size_t drift_batch, const RecoveryOptions& options) {
  const double target = pre_drift_mean(log, drift_batch, options.lookback) - options.tolerance;
  const std::size_t ref = first_flag_after(log, drift_batch).value_or(drift_batch);
  std::map<std::size_t, double> acc;
  for (const auto& r : log.rows) acc[r.batch_index] = r.accuracy;
  const std::size_t w = std::max<std::size_t>(options.moving_window, 1);
  for (std::size_t k = 1;; ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < w; ++i) {
      const auto it = acc.find(ref + k + i);
      if (it == acc.end()) return std::nullopt;
      sum += it->second;
    }
    if (sum / static_cast<double>(w) >= target - 1e-12) return k;
  }
}

std::string RunSummary::recovery_text() const {
  if (recovery.empty()) return "n/a";
  std::string out;
  for (std::size_t i = 0; i < recovery.size(); ++i) {
    if (i) out += ';';
    out += recovery[i] ? std::to_string(*recovery[i]) : "never";
  }
  return out;
}

RunSummary summarize(const RunLog& log, std::optional<std::vector<std::size_t>> true_drifts,
                     const RecoveryOptions& options) {
  RunSummary s;
  s.run_id = log.run_id();
  s.label = log.metadata.value("label", log.rows.empty() ? std::string() : log.rows.front().strategy);
  if (!log.rows.empty()) {
    s.strategy = log.rows.front().strategy;
    s.paradigm = log.rows.front().paradigm;
    s.seed = log.rows.front().seed;
  }
  s.batches = log.rows.size();
  s.mean_accuracy = log.mean_accuracy();
  if (true_drifts) {
    s.true_drifts = *true_drifts;
  } else if (log.metadata.contains("true_drift_batches")) {
    s.true_drifts = log.metadata["true_drift_batches"].get<std::vector<std::size_t>>();
  }
  for (std::size_t d : s.true_drifts) {
    try {
      s.recovery.push_back(recovery_time(log, d, options));
    } catch (const std::out_of_range&) {
      s.recovery.push_back(std::nullopt);
    } catch (const std::invalid_argument&) {
      s.recovery.push_back(std::nullopt);
    }
  }
  s.retrains = log.retrain_count();
  s.drifts_flagged = log.drift_batches().size();
  s.pipeline_changes = log.pipeline_change_count();
  s.total_fit_seconds = log.total_fit_seconds();
  return s;
}

// ---- streams -------------------------------------------------------------------------

void StreamSource::validate(std::vector<std::string>& errors) const {
  if (csv_path) {
    if (!fs::exists(*csv_path)) errors.push_back("stream file '" + *csv_path + "' does not exist");
    return;
  }
  if (n < 1000) errors.push_back("stream length n must be at least 1000");
  if (noise < 0.0 || noise > 0.5) errors.push_back("noise must be in [0, 0.5]");
  if (drift != DriftKind::none) {
    if (magnitude < 1 || magnitude > 4) errors.push_back("magnitude must be in 1..4");
    if (center == 0 || center >= n) errors.push_back("drift center must be inside the stream");
    if (drift != DriftKind::abrupt && width < 2) errors.push_back("gradual and mixed drift need width >= 2");
  }
}

std::string StreamSource::describe() const {
  if (csv_path) return fs::path(*csv_path).stem().string();
  std::string s = to_string(family) + "-" + to_string(drift);
  if (drift != DriftKind::none) s += "-m" + std::to_string(magnitude);
  if (noise > 0.0) s += "-n" + format_number(noise);
  return s;
}

namespace {

nlohmann::json concept_json(const Concept& c) {
  if (const auto* s = std::get_if<SeaConcept>(&c)) return {{"family", "sea"}, {"threshold", s->threshold}};
  const auto& h = std::get<HyperplaneConcept>(c);
  return {{"family", "hyperplane"}, {"weights", h.weights}, {"offset", h.offset}};
}

DriftSpec drift_spec_for(const StreamSource& source) {
  return make_drift_spec(source.family, source.drift, source.n, source.center, source.width, source.magnitude);
}

nlohmann::json schema_json(const StreamSchema& schema) {
  nlohmann::json kinds = nlohmann::json::array();
  for (const auto& k : schema.feature_kinds)
    kinds.push_back(k.is_categorical() ? nlohmann::json{{"type", "categorical"}, {"cardinality", k.cardinality}}
                                       : nlohmann::json{{"type", "numeric"}});
  return {{"n_features", schema.n_features},
          {"n_classes", schema.n_classes},
          {"feature_names", schema.feature_names},
          {"class_names", schema.class_names},
          {"feature_kinds", kinds}};
}

}  // namespace

nlohmann::json to_json(const DriftSpec& spec) {
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : spec.components)
    comps.push_back({{"center", c.center}, {"width", c.width}, {"from", concept_json(c.from)}, {"to", concept_json(c.to)}});
  return {{"kind", to_string(spec.kind)},
          {"base", concept_json(spec.base)},
          {"magnitude_level", spec.magnitude_level},
          {"components", comps}};
}

LoadedStream load_stream(const StreamSource& source, std::uint64_t seed) {
  LoadedStream out;
  if (source.csv_path) {
    SchemaHints hints;
    hints.label_column = source.label_column;
    IngestResult in = ingest_csv(*source.csv_path, hints);
    out.schema = std::move(in.schema);
    out.instances = std::move(in.instances);
    std::ifstream meta(sidecar_path(*source.csv_path));
    if (meta) {
      const auto j = nlohmann::json::parse(meta, nullptr, false);
      if (!j.is_discarded() && j.contains("drift_positions"))
        out.drift_positions = j["drift_positions"].get<std::vector<std::size_t>>();
    }
    return out;
  }
  GeneratedStream g =
      generate_stream(source.family, source.n, drift_spec_for(source), NoiseSpec{source.noise}, seed);
  out.schema = std::move(g.schema);
  out.instances = std::move(g.instances);
  out.drift_positions = std::move(g.drift_positions);
  return out;
}

LoadedStream write_generated_stream(const std::string& csv_path, const StreamSource& source, std::uint64_t seed,
                                    std::size_t batch_size) {
  if (source.csv_path) throw std::invalid_argument("write_generated_stream needs a generated source");
  LoadedStream s = load_stream(source, seed);
  export_csv(csv_path, s.schema, s.instances);
  nlohmann::json meta = {{"generator", to_json(source)},
                         {"seed", seed},
                         {"schema", schema_json(s.schema)},
                         {"drift_spec", to_json(drift_spec_for(source))},
                         {"drift_positions", s.drift_positions},
                         {"batch_size", batch_size},
                         {"drift_batches", drift_batches(s.drift_positions, batch_size)}};
  std::ofstream out(sidecar_path(csv_path), std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + sidecar_path(csv_path) + "'");
  out << meta.dump(2) << '\n';
  return s;
}

nlohmann::json to_json(const StreamSource& s) {
  if (s.csv_path) {
    nlohmann::json j = {{"csv", *s.csv_path}};
    if (s.label_column) j["label_column"] = *s.label_column;
    return j;
  }
  return {{"family", to_string(s.family)}, {"n", s.n},         {"drift", to_string(s.drift)}, {"center", s.center},
          {"width", s.width},              {"magnitude", s.magnitude}, {"noise", s.noise}};
}

StreamSource stream_source_from_json(const nlohmann::json& j) {
  StreamSource s;
  if (j.contains("csv")) {
    s.csv_path = j["csv"].get<std::string>();
    if (j.contains("label_column")) s.label_column = j["label_column"].get<std::string>();
    return s;
  }
  if (j.contains("family")) s.family = family_from_string(j["family"].get<std::string>());
  s.n = j.value("n", s.n);
  if (j.contains("drift")) s.drift = drift_kind_from_string(j["drift"].get<std::string>());
  s.center = j.value("center", s.center);
  s.width = j.value("width", s.width);
  s.magnitude = j.value("magnitude", s.magnitude);
  s.noise = j.value("noise", s.noise);
  return s;
}

// ---- single runs ---------------------------------------------------------------------

bool is_baseline_name(const std::string& name) {
  try {
    baseline_from_string(name);
    return true;
  } catch (const std::invalid_argument&) {
    return false;
  }
}

RunLog run_method(const RunRequest& request, const LoadedStream& stream, const std::string& run_id,
                  const nlohmann::json& stream_meta, const RunHooks& hooks) {
  const auto& oc = request.orchestrator;
  const auto batches = batchify(stream.instances, oc.batch_size);
  RunLog log;
  if (is_baseline_name(request.method)) {
    BaselineConfig bc;
    bc.batch_size = oc.batch_size;
    bc.window_batches = oc.window_batches;
    bc.seed = oc.seed;
    bc.eddm = oc.eddm;
    bc.preset_drifts = oc.preset_drifts;
    bc.oza_members = request.oza_members;
    bc.record_timings = oc.record_timings;
    log = run_baseline(baseline_from_string(request.method), batches, stream.schema, bc, hooks, run_id);
  } else {
    log = run_stream(batches, stream.schema, strategy_from_string(request.method), oc, hooks, run_id);
  }
  log.metadata["stream"] = stream_meta;
  log.metadata["true_drift_positions"] = stream.drift_positions;
  log.metadata["true_drift_batches"] = drift_batches(stream.drift_positions, oc.batch_size);
  return log;
}

// ---- sweeps ------------------------------------------------------------------------------

namespace {

struct AxisName {
  SweepAxis axis;
  const char* name;
};

constexpr AxisName kAxes[] = {
    {SweepAxis::strategy, "strategy"},
    {SweepAxis::magnitude_level, "magnitude_level"},
    {SweepAxis::time_budget, "time_budget"},
    {SweepAxis::stacker_kind, "stacker_kind"},
};

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-') ? c : '_';
  return out;
}

// Applies one axis value to copies of the fixed settings.
void apply_axis(SweepAxis axis, const std::string& value, RunRequest& request, StreamSource& stream) {
  switch (axis) {
    case SweepAxis::strategy:
      request.method = value;
      break;
    case SweepAxis::magnitude_level:
      stream.magnitude = std::stoi(value);
      break;
    case SweepAxis::time_budget:
      request.orchestrator.budget = SearchBudget::seconds(std::stod(value));
      break;
    case SweepAxis::stacker_kind:
      request.orchestrator.stacker = stacker_from_string(value);
      break;
  }
}

nlohmann::json request_json(const RunRequest& r) {
  const auto& o = r.orchestrator;
  nlohmann::json j = {{"method", r.method},
                      {"batch_size", o.batch_size},
                      {"window_batches", o.window_batches},
                      {"paradigm", to_string(o.paradigm)},
                      {"stacker", to_string(o.stacker)},
                      {"carry_over_members", o.carry_over_members},
                      {"record_timings", o.record_timings},
                      {"oza_members", r.oza_members},
                      {"eddm",
                       {{"alpha", o.eddm.alpha},
                        {"min_errors", o.eddm.min_errors},
                        {"warmup_errors", o.eddm.warmup_errors}}}};
  if (o.budget.wall_clock_seconds) j["budget_seconds"] = *o.budget.wall_clock_seconds;
  if (o.budget.max_evaluations) j["budget_evaluations"] = *o.budget.max_evaluations;
  if (o.preset_drifts) j["preset_drifts"] = *o.preset_drifts;
  return j;
}

RunRequest request_from_json(const nlohmann::json& j) {
  RunRequest r;
  auto& o = r.orchestrator;
  r.method = j.value("method", r.method);
  o.batch_size = j.value("batch_size", o.batch_size);
  o.window_batches = j.value("window_batches", o.window_batches);
  if (j.contains("paradigm")) o.paradigm = paradigm_from_string(j["paradigm"].get<std::string>());
  if (j.contains("stacker")) o.stacker = stacker_from_string(j["stacker"].get<std::string>());
  o.carry_over_members = j.value("carry_over_members", o.carry_over_members);
  o.record_timings = j.value("record_timings", o.record_timings);
  r.oza_members = j.value("oza_members", r.oza_members);
  if (j.contains("eddm")) {
    const auto& e = j["eddm"];
    o.eddm.alpha = e.value("alpha", o.eddm.alpha);
    o.eddm.min_errors = e.value("min_errors", o.eddm.min_errors);
    o.eddm.warmup_errors = e.value("warmup_errors", o.eddm.warmup_errors);
  }
  if (j.contains("budget_seconds") || j.contains("budget_evaluations")) {
    o.budget = SearchBudget{};
    if (j.contains("budget_seconds")) o.budget.wall_clock_seconds = j["budget_seconds"].get<double>();
    if (j.contains("budget_evaluations")) o.budget.max_evaluations = j["budget_evaluations"].get<std::size_t>();
  }
  if (j.contains("preset_drifts")) o.preset_drifts = j["preset_drifts"].get<std::vector<std::size_t>>();
  return r;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

bool load_complete(const fs::path& csv, RunLog& log) {
  if (!fs::exists(csv) || !fs::exists(sidecar_path(csv.string()))) return false;
  try {
    log = load_runlog(csv.string());
  } catch (const std::exception&) {
    return false;
  }
  return log.metadata.value("complete", false);
}

}  // namespace

std::string to_string(SweepAxis axis) {
  for (const auto& a : kAxes)
    if (a.axis == axis) return a.name;
  return "?";
}

SweepAxis sweep_axis_from_string(const std::string& name) {
  for (const auto& a : kAxes)
    if (name == a.name) return a.axis;
  throw std::invalid_argument("unknown sweep axis '" + name +
                              "' (expected strategy, magnitude_level, time_budget or stacker_kind)");
}

void SweepSpec::validate() const {
  std::vector<std::string> errors;
  if (id.empty() || sanitize(id) != id) errors.push_back("sweep id must be non-empty and use [A-Za-z0-9._-]");
  if (values.empty()) errors.push_back("sweep needs at least one axis value");
  if (seeds < 1) errors.push_back("sweep needs at least one seed");
  for (const auto& v : values) {
    RunRequest r = base;
    StreamSource s = stream;
    try {
      apply_axis(axis, v, r, s);
      if (axis == SweepAxis::strategy && !is_baseline_name(v)) strategy_from_string(v);
      if (axis == SweepAxis::magnitude_level && (s.magnitude < 1 || s.magnitude > 4))
        errors.push_back("magnitude level '" + v + "' outside 1..4");
      if (axis == SweepAxis::time_budget && !(*r.orchestrator.budget.wall_clock_seconds > 0.0))
        errors.push_back("time budget '" + v + "' must be positive");
    } catch (const std::exception& e) {
      errors.push_back("bad " + to_string(axis) + " value '" + v + "': " + e.what());
    }
  }
  if (axis != SweepAxis::strategy && !is_baseline_name(base.method)) {
    try {
      strategy_from_string(base.method);
    } catch (const std::exception& e) {
      errors.emplace_back(e.what());
    }
  }
  stream.validate(errors);
  try {
    base.orchestrator.validate();
  } catch (const std::exception& e) {
    errors.emplace_back(e.what());
  }
  if (errors.empty()) return;
  std::string msg = "invalid sweep spec:";
  for (const auto& e : errors) msg += "\n  - " + e;
  throw std::invalid_argument(msg);
}

nlohmann::json to_json(const SweepSpec& spec) {
  return {{"id", spec.id},
          {"axis", to_string(spec.axis)},
          {"values", spec.values},
          {"seeds", spec.seeds},
          {"master_seed", spec.master_seed},
          {"stream", to_json(spec.stream)},
          {"base", request_json(spec.base)}};
}

SweepSpec sweep_spec_from_json(const nlohmann::json& j) {
  SweepSpec s;
  s.id = j.value("id", s.id);
  if (j.contains("axis")) s.axis = sweep_axis_from_string(j["axis"].get<std::string>());
  if (j.contains("values"))
    for (const auto& v : j["values"]) s.values.push_back(v.is_string() ? v.get<std::string>() : v.dump());
  s.seeds = j.value("seeds", s.seeds);
  s.master_seed = j.value("master_seed", s.master_seed);
  if (j.contains("stream")) s.stream = stream_source_from_json(j["stream"]);
  if (j.contains("base")) s.base = request_from_json(j["base"]);
  return s;
}

std::uint64_t sweep_stream_seed(std::uint64_t master_seed, std::size_t seed_index) {
  return mix_seed(mix_seed(master_seed, 0x57ea), seed_index);
}

std::uint64_t sweep_run_seed(std::uint64_t master_seed, const std::string& value, std::size_t seed_index) {
  return mix_seed(mix_seed(master_seed, fnv1a64(value)), seed_index);
}

std::string sweep_run_id(const SweepSpec& spec, const std::string& value, std::size_t seed_index) {
  return to_string(spec.axis) + "-" + sanitize(value) + "-s" + std::to_string(seed_index);
}

std::size_t SweepResult::failures() const {
  return static_cast<std::size_t>(std::count_if(runs.begin(), runs.end(), [](const SweepRun& r) { return !r.log; }));
}

std::vector<RunLog> SweepResult::logs() const {
  std::vector<RunLog> out;
  for (const auto& r : runs)
    if (r.log) out.push_back(*r.log);
  return out;
}

SweepResult run_sweep(const SweepSpec& spec, const std::string& root, std::size_t jobs) {
  spec.validate();
  const fs::path dir = fs::path(root) / spec.id;
  fs::create_directories(dir);
  write_text(dir / "manifest.json", to_json(spec).dump(2) + "\n");

  SweepResult result;
  result.directory = dir.string();
  for (const auto& v : spec.values)
    for (std::size_t s = 0; s < spec.seeds; ++s) result.runs.push_back(SweepRun{sweep_run_id(spec, v, s), v, s, {}, {}, false});

  auto execute = [&](SweepRun& run) {
    const fs::path csv = dir / (run.run_id + ".csv");
    RunLog existing;
    if (load_complete(csv, existing)) {
      run.log = std::move(existing);
      run.resumed = true;
      return;
    }
    try {
      RunRequest request = spec.base;
      StreamSource source = spec.stream;
      apply_axis(spec.axis, run.value, request, source);
      request.orchestrator.seed = sweep_run_seed(spec.master_seed, run.value, run.seed_index);
      const std::uint64_t stream_seed = sweep_stream_seed(spec.master_seed, run.seed_index);
      const LoadedStream stream = load_stream(source, stream_seed);
      nlohmann::json meta = to_json(source);
      meta["seed"] = stream_seed;
      RunLog log = run_method(request, stream, run.run_id, meta);
      log.metadata["sweep"] = {{"id", spec.id},
                               {"axis", to_string(spec.axis)},
                               {"value", run.value},
                               {"seed_index", run.seed_index}};
      log.metadata["stream_id"] = source.describe() + "-s" + std::to_string(run.seed_index);
      log.metadata["label"] = spec.axis == SweepAxis::strategy ? run.value
                                                               : request.method + " " + to_string(spec.axis) + "=" + run.value;
      log.metadata["complete"] = true;
      save_runlog(log, csv.string());
      run.log = std::move(log);
    } catch (const std::exception& e) {
      run.error = e.what();
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, result.runs.size()));
  if (workers == 1) {
    for (auto& r : result.runs) execute(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < result.runs.size(); i = next++) execute(result.runs[i]);
      });
    for (auto& t : pool) t.join();
  }

  nlohmann::json failures = nlohmann::json::array();
  for (const auto& r : result.runs)
    if (!r.log) failures.push_back({{"run_id", r.run_id}, {"value", r.value}, {"seed_index", r.seed_index}, {"error", r.error}});
  write_text(dir / "failures.json", failures.dump(2) + "\n");

  const auto logs = result.logs();
  std::vector<RunSummary> summaries;
  if (!logs.empty()) summaries = render_report(logs, dir.string());

  // Axis value -> aggregate over seeds.
  std::string table = to_string(spec.axis) + ",runs,failures,mean_accuracy,min_accuracy,max_accuracy,mean_fit_seconds\n";
  for (const auto& v : spec.values) {
    std::vector<double> acc, fit;
    std::size_t failed = 0;
    for (const auto& r : result.runs) {
      if (r.value != v) continue;
      if (!r.log) {
        ++failed;
        continue;
      }
      acc.push_back(r.log->mean_accuracy());
      fit.push_back(r.log->total_fit_seconds());
    }
    table += v + "," + std::to_string(acc.size()) + "," + std::to_string(failed);
    if (acc.empty()) {
      table += ",,,,\n";
      continue;
    }
    double sa = 0.0, sf = 0.0;
    for (double a : acc) sa += a;
    for (double f : fit) sf += f;
    table += "," + format_number(sa / static_cast<double>(acc.size())) + "," +
             format_number(*std::min_element(acc.begin(), acc.end())) + "," +
             format_number(*std::max_element(acc.begin(), acc.end())) + "," +
             format_number(sf / static_cast<double>(fit.size())) + "\n";
  }
  write_text(dir / "table.csv", table);
  return result;
}

}  // namespace autostream
