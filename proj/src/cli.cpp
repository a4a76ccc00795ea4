#include "autostream/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "autostream/random.hpp"
#include "autostream/version.hpp"

namespace fs = std::filesystem;

namespace autostream {

// ---- helpers ------------------------------------------------------------------------

std::size_t levenshtein(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::optional<std::string> suggest(const std::string& word, const std::vector<std::string>& candidates) {
  std::optional<std::string> best;
  std::size_t best_d = 4;
  for (const auto& c : candidates) {
    const std::size_t d = levenshtein(word, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

std::vector<std::size_t> parse_index_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok.erase(0, tok.find_first_not_of(" \t"));
    tok.erase(tok.find_last_not_of(" \t") + 1);
    if (tok.empty()) continue;
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size() || v < 0) throw std::invalid_argument("bad batch index '" + tok + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::vector<std::uint8_t> read_correctness(std::istream& in) {
  std::vector<std::uint8_t> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::stringstream ss(line);
    std::string tok;
    while (ss >> tok) {
      if (tok == "0" || tok == "1") {
        out.push_back(tok == "1");
      } else {
        throw std::invalid_argument("line " + std::to_string(line_no) + ": expected 0 or 1, got '" + tok + "'");
      }
    }
  }
  return out;
}

std::vector<std::string> ExperimentConfig::violations() const {
  std::vector<std::string> errors;
  if (methods.empty()) errors.push_back("at least one strategy is required");
  for (const auto& m : methods) {
    if (is_baseline_name(m)) continue;
    try {
      strategy_from_string(m);
    } catch (const std::exception& e) {
      errors.emplace_back(e.what());
    }
  }
  try {
    paradigm_from_string(paradigm);
  } catch (const std::exception& e) {
    errors.emplace_back(e.what());
  }
  try {
    stacker_from_string(stacker);
  } catch (const std::exception& e) {
    errors.emplace_back(e.what());
  }
  if (budget_seconds && !(*budget_seconds > 0.0)) errors.push_back("--budget-sec must be positive");
  if (budget_evaluations && *budget_evaluations < 1) errors.push_back("--budget-evals must be at least 1");
  if (batch_size && *batch_size < 100) errors.push_back("--batch-size must be at least 100");
  if (window_batches < 1) errors.push_back("--window must be at least 1");
  if (oza_members < 1) errors.push_back("--oza-members must be at least 1");
  try {
    eddm.validate();
  } catch (const std::exception& e) {
    errors.emplace_back(e.what());
  }
  stream.validate(errors);
  if (stream.csv_path) {
    const fs::path out = fs::absolute(out_dir).lexically_normal();
    if (fs::absolute(*stream.csv_path).lexically_normal().parent_path() == out)
      errors.push_back("output directory must differ from the input stream's directory");
  }
  return errors;
}

RunRequest ExperimentConfig::request(const std::string& method) const {
  RunRequest r;
  r.method = is_baseline_name(method) ? baseline_code(baseline_from_string(method)) : strategy_code(strategy_from_string(method));
  auto& o = r.orchestrator;
  o.batch_size = batch_size.value_or(is_baseline_name(method) ? 1000
                                                              : OrchestratorConfig::default_batch_size(strategy_from_string(method)));
  o.window_batches = window_batches;
  o.paradigm = paradigm_from_string(paradigm);
  o.budget = SearchBudget{};
  o.budget.wall_clock_seconds = budget_seconds;
  o.budget.max_evaluations = budget_evaluations;
  if (!budget_seconds && !budget_evaluations) o.budget = SearchBudget::evaluations(20);
  o.stacker = stacker_from_string(stacker);
  o.seed = seed;
  o.eddm = eddm;
  o.preset_drifts = preset_drifts;
  o.carry_over_members = carry_over_members;
  o.record_timings = record_timings;
  r.oza_members = oza_members;
  return r;
}

namespace {

// CLI11 reads config files only for the top-level app, so `--config` is
// expanded here: each JSON key becomes a flag placed before the command-line
// arguments, which therefore take precedence (options keep their last value).
std::vector<std::string> expand_config(const CLI::App& app, const std::vector<std::string>& argv,
                                       std::vector<std::string>& errors) {
  if (argv.size() < 2) return argv;
  const CLI::App* sub = nullptr;
  for (const CLI::App* s : app.get_subcommands([](const CLI::App*) { return true; }))
    if (s->get_name() == argv[1]) sub = s;
  if (!sub) return argv;

  std::vector<std::string> rest;
  std::optional<std::string> path;
  for (std::size_t i = 2; i < argv.size(); ++i) {
    const std::string& a = argv[i];
    if (a == "--config") {
      if (i + 1 >= argv.size()) {
        errors.push_back("--config needs a file path");
        return argv;
      }
      path = argv[++i];
    } else if (a.rfind("--config=", 0) == 0) {
      path = a.substr(9);
    } else {
      rest.push_back(a);
    }
  }
  if (!path) return argv;

  std::ifstream in(*path);
  if (!in) {
    errors.push_back("config file '" + *path + "' cannot be read");
    return argv;
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    errors.push_back("config file '" + *path + "' is not valid JSON: " + e.what());
    return argv;
  }
  if (!j.is_object()) {
    errors.push_back("config file '" + *path + "' must hold a JSON object");
    return argv;
  }

  std::vector<std::string> names;
  for (const CLI::Option* opt : sub->get_options({}))
    for (const auto& n : opt->get_lnames()) names.push_back(n);
  auto text = [](const nlohmann::json& x) {
    if (x.is_string()) return x.get<std::string>();
    return x.dump();
  };

  std::vector<std::string> out{argv[0], argv[1]};
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const CLI::Option* opt = key == "config" ? nullptr : sub->get_option_no_throw("--" + key);
    if (!opt) {
      std::string msg = "config key '" + key + "' is not a flag of '" + sub->get_name() + "'";
      if (const auto s = suggest(key, names)) msg += "; did you mean '" + *s + "'?";
      errors.push_back(msg);
      continue;
    }
    const auto& v = it.value();
    if (opt->get_expected_max() == 0) {
      if (!v.is_boolean()) errors.push_back("config key '" + key + "' must be true or false");
      else if (v.get<bool>()) out.push_back("--" + key);
      continue;
    }
    if (v.is_object() || v.is_null()) {
      errors.push_back("config key '" + key + "' must be a scalar or a list");
      continue;
    }
    if (v.is_array()) {
      std::string joined;
      for (const auto& e : v) joined += (joined.empty() ? "" : ",") + text(e);
      out.push_back("--" + key);
      out.push_back(joined);
    } else {
      out.push_back("--" + key);
      out.push_back(text(v));
    }
  }
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok.erase(0, tok.find_first_not_of(" \t"));
    tok.erase(tok.find_last_not_of(" \t") + 1);
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

struct StreamFlags {
  std::string stream_path;
  std::string family = "sea";
  std::size_t n = 100000;
  std::string drift = "abrupt";
  std::size_t center = 50000;
  std::size_t width = 1;
  int magnitude = 4;
  double noise = 0.0;
  std::string label_column;

  void add(CLI::App* app, bool allow_file) {
    if (allow_file) {
      app->add_option("--stream", stream_path, "Input stream CSV; when absent a stream is generated");
      app->add_option("--label-column", label_column, "Label column of --stream (default: last column)");
    }
    app->add_option("--family", family, "Generator family: sea or hyperplane")->capture_default_str();
    app->add_option("--n", n, "Number of instances to generate")->capture_default_str();
    app->add_option("--drift", drift, "Drift kind: none, abrupt, gradual or mixed")->capture_default_str();
    app->add_option("--center", center, "Instance index of the drift midpoint")->capture_default_str();
    app->add_option("--width", width, "Instances spanned by a gradual drift (1 = abrupt)")->capture_default_str();
    app->add_option("--magnitude", magnitude, "Drift magnitude level 1..4")->capture_default_str();
    app->add_option("--noise", noise, "Label flip rate")->capture_default_str();
  }

  StreamSource build(std::vector<std::string>& errors) const {
    StreamSource s;
    if (!stream_path.empty()) {
      s.csv_path = stream_path;
      if (!label_column.empty()) s.label_column = label_column;
      return s;
    }
    try {
      s.family = family_from_string(family);
    } catch (const std::exception& e) {
      errors.emplace_back(e.what());
    }
    try {
      s.drift = drift_kind_from_string(drift);
    } catch (const std::exception& e) {
      errors.emplace_back(e.what());
    }
    s.n = n;
    s.center = center;
    s.width = drift == "abrupt" ? 1 : width;
    s.magnitude = magnitude;
    s.noise = noise;
    return s;
  }
};

struct ExperimentFlags {
  StreamFlags stream;
  std::string strategies = "T1";
  std::string paradigm = "smbo";
  double budget_sec = 0.0;
  std::size_t budget_evals = 0;
  std::string stacker = "linear";
  std::size_t batch_size = 0;
  std::size_t window = 3;
  std::uint64_t seed = 0;
  std::string preset;
  std::string timings = "on";
  bool carry_over = false;
  std::size_t oza_members = 10;
  double eddm_alpha = 0.95;
  std::size_t eddm_min_errors = 30;
  std::size_t eddm_warmup = 1000;
  std::string out = "results";

  void add(CLI::App* app) {
    stream.add(app, true);
    app->add_option("--paradigm", paradigm, "Search paradigm: random_stack, smbo or evo")->capture_default_str();
    app->add_option("--budget-sec", budget_sec, "Wall-clock search budget per search, seconds");
    app->add_option("--budget-evals", budget_evals, "Evaluation-count search budget (default 20 when no budget is given)");
    app->add_option("--stacker", stacker, "Stacker meta-learner for random_stack: linear or gbm")->capture_default_str();
    app->add_option("--batch-size", batch_size, "Instances per batch (default 1000; PRS 20000)");
    app->add_option("--window", window, "Sliding window capacity in batches")->capture_default_str();
    app->add_option("--seed", seed, "Seed controlling all randomness")->capture_default_str();
    app->add_option("--preset-drifts", preset, "Comma-separated batch indices forced as drift; bypasses the detector");
    app->add_option("--timings", timings, "Record fit/predict seconds: on or off")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    app->add_flag("--carry-over", carry_over, "DWS keeps the previous best member in the new ensemble");
    app->add_option("--oza-members", oza_members, "Members of the OZA baseline")->capture_default_str();
    app->add_option("--eddm-alpha", eddm_alpha, "Drift detector alarm ratio")->capture_default_str();
    app->add_option("--eddm-min-errors", eddm_min_errors, "Errors required before an alarm")->capture_default_str();
    app->add_option("--eddm-warmup", eddm_warmup, "Errors seen before the detector tracks its peak")->capture_default_str();
    app->add_option("--out", out, "Output directory")->capture_default_str();
  }

  ExperimentConfig build(std::vector<std::string>& errors) const {
    ExperimentConfig c;
    c.stream = stream.build(errors);
    c.methods = split_list(strategies);
    c.paradigm = paradigm;
    if (budget_sec != 0.0) c.budget_seconds = budget_sec;
    if (budget_evals != 0) c.budget_evaluations = budget_evals;
    c.stacker = stacker;
    if (batch_size != 0) c.batch_size = batch_size;
    c.window_batches = window;
    c.seed = seed;
    if (!preset.empty()) {
      try {
        c.preset_drifts = parse_index_list(preset);
      } catch (const std::exception& e) {
        errors.push_back(std::string("--preset-drifts: ") + e.what());
      }
    }
    c.record_timings = timings == "on";
    c.carry_over_members = carry_over;
    c.oza_members = oza_members;
    c.eddm = EddmConfig{eddm_alpha, eddm_min_errors, eddm_warmup};
    c.out_dir = out;
    for (auto& v : c.violations()) errors.push_back(std::move(v));
    return c;
  }
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void fail_on(const std::vector<std::string>& errors) {
  if (errors.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& e : errors) msg += "\n  - " + e;
  throw UsageError(msg);
}

std::vector<std::string> long_flags(const CLI::App* app) {
  std::vector<std::string> out;
  for (const CLI::Option* o : app->get_options({}))
    for (const auto& n : o->get_lnames()) out.push_back("--" + n);
  return out;
}

// Reports the first unknown long flag for the chosen subcommand with a suggestion.
std::optional<std::string> unknown_flag(const CLI::App& app, const std::vector<std::string>& argv) {
  const CLI::App* scope = &app;
  for (std::size_t i = 1; i < argv.size(); ++i) {
    const std::string& a = argv[i];
    if (a == "--") break;
    if (a.rfind("--", 0) != 0) {
      if (scope == &app)
        for (const CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; }))
          if (sub->get_name() == a) scope = sub;
      continue;
    }
    const std::string name = a.substr(0, a.find('='));
    auto flags = long_flags(scope);
    if (scope != &app) {
      const auto top = long_flags(&app);
      flags.insert(flags.end(), top.begin(), top.end());
    }
    if (std::find(flags.begin(), flags.end(), name) != flags.end()) continue;
    std::string msg = "unknown flag " + name;
    if (const auto s = suggest(name, flags)) msg += "; did you mean " + *s + "?";
    return msg;
  }
  return std::nullopt;
}

std::string run_id_for(const RunRequest& r) {
  if (is_baseline_name(r.method)) return r.method + "-" + std::to_string(r.orchestrator.seed);
  return r.method + "-" + to_string(r.orchestrator.paradigm) + "-" + std::to_string(r.orchestrator.seed);
}

std::vector<RunLog> load_logs(const std::vector<std::string>& inputs) {
  std::vector<std::string> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<std::string> found;
      for (const auto& e : fs::directory_iterator(in)) {
        if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
        std::ifstream f(e.path());
        std::string header;
        if (std::getline(f, header) && header == kRunLogHeader) found.push_back(e.path().string());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(in);
    }
  }
  std::vector<RunLog> logs;
  for (const auto& f : files) logs.push_back(load_runlog(f));
  return logs;
}

void print_summaries(const std::vector<RunSummary>& summaries, std::ostream& out) {
  out << "run_id\tmean_accuracy\tdrifts\tretrains\tpipeline_changes\trecovery\n";
  for (const auto& s : summaries) {
    char acc[32];
    std::snprintf(acc, sizeof(acc), "%.4f", s.mean_accuracy);
    out << s.run_id << '\t' << acc << '\t' << s.drifts_flagged << '\t' << s.retrains << '\t' << s.pipeline_changes
        << '\t' << s.recovery_text() << '\n';
  }
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Streaming AutoML with drift adaptation", argv.empty() ? "autostream" : argv.front()};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  std::string config_path;
  auto with_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON file of flag values; command-line flags take precedence");
    for (CLI::Option* opt : sub->get_options({}))
      if (opt->get_expected_max() == 1) opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  };

  // generate
  StreamFlags gen;
  std::string gen_out;
  std::uint64_t gen_seed = 0;
  std::size_t gen_batch = 1000;
  CLI::App* generate = app.add_subcommand("generate", "Write a synthetic stream CSV plus its JSON sidecar");
  gen.add(generate, false);
  generate->add_option("--seed", gen_seed, "Generator seed")->capture_default_str();
  generate->add_option("--batch-size", gen_batch, "Batch size used for drift batches in the sidecar")->capture_default_str();
  generate->add_option("--out", gen_out, "Output CSV path")->required();
  with_config(generate);

  // run
  ExperimentFlags run_flags;
  std::string run_id;
  CLI::App* run = app.add_subcommand("run", "Run strategies or baselines over one stream");
  run_flags.add(run);
  run->add_option("--strategy", run_flags.strategies,
                  "Comma-separated methods: T1, DI, DRT, DWS, DRS, PRS, OZA, BLAST, GBM")
      ->capture_default_str();
  run->add_option("--run-id", run_id, "Run id (single method only)");
  with_config(run);

  // sweep
  ExperimentFlags sweep_flags;
  std::string axis = "strategy", values, sweep_id = "sweep", manifest;
  std::size_t seeds = 1, jobs = 1;
  CLI::App* sweep = app.add_subcommand("sweep", "Run a cartesian sweep over one axis and several seeds");
  sweep_flags.add(sweep);
  sweep->add_option("--strategy", sweep_flags.strategies, "Method for axes other than strategy")->capture_default_str();
  sweep->add_option("--axis", axis, "strategy, magnitude_level, time_budget or stacker_kind")->capture_default_str();
  sweep->add_option("--values", values, "Comma-separated axis values");
  sweep->add_option("--seeds", seeds, "Seeds per axis value")->capture_default_str();
  sweep->add_option("--id", sweep_id, "Sweep id; results go to <out>/<id>/")->capture_default_str();
  sweep->add_option("--jobs", jobs, "Parallel runs")->capture_default_str();
  sweep->add_option("--manifest", manifest, "Sweep manifest JSON (as written by a previous sweep); replaces the other flags");
  with_config(sweep);

  // detect
  std::string detect_in;
  double alpha = 0.95;
  std::size_t min_errors = 30, warmup = 1000, offset = 0;
  CLI::App* detect = app.add_subcommand("detect", "Replay a stored correctness stream and print alarm positions");
  detect->add_option("--input", detect_in, "File of 0/1 outcomes (1 = correct)")->required();
  detect->add_option("--alpha", alpha, "Alarm ratio")->capture_default_str();
  detect->add_option("--min-errors", min_errors, "Errors required before an alarm")->capture_default_str();
  detect->add_option("--warmup", warmup, "Errors seen before the peak is tracked")->capture_default_str();
  detect->add_option("--offset", offset, "Stream position of the first outcome")->capture_default_str();
  with_config(detect);

  // report
  std::vector<std::string> report_in;
  std::string report_out, title;
  double tolerance = 0.02;
  CLI::App* report = app.add_subcommand("report", "Render plots and a summary table from run logs");
  report->add_option("--runs", report_in, "Run log CSV files or directories holding them")->required();
  report->add_option("--out", report_out, "Output directory")->required();
  report->add_option("--title", title, "Plot title prefix");
  report->add_option("--tolerance", tolerance, "Recovery tolerance in accuracy (fraction)")->capture_default_str();
  with_config(report);

  if (const auto bad = unknown_flag(app, argv)) {
    err << "error: " << *bad << "\nRun with --help for usage.\n";
    return kExitUsage;
  }
  std::vector<std::string> config_errors;
  const std::vector<std::string> args = expand_config(app, argv, config_errors);
  if (!config_errors.empty()) {
    err << "error: invalid configuration:\n";
    for (const auto& e : config_errors) err << "  - " << e << '\n';
    return kExitUsage;
  }

  std::vector<std::string> reversed(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*generate) {
      std::vector<std::string> errors;
      StreamSource s = gen.build(errors);
      s.validate(errors);
      if (gen_batch < 1) errors.push_back("--batch-size must be at least 1");
      fail_on(errors);
      const fs::path path(gen_out);
      if (path.has_parent_path()) fs::create_directories(path.parent_path());
      const LoadedStream stream = write_generated_stream(gen_out, s, gen_seed, gen_batch);
      out << "wrote " << gen_out << " (" << stream.instances.size() << " instances) and " << sidecar_path(gen_out)
          << '\n';
      return kExitOk;
    }

    if (*run) {
      std::vector<std::string> errors;
      const ExperimentConfig cfg = run_flags.build(errors);
      if (!run_id.empty() && cfg.methods.size() != 1) errors.push_back("--run-id needs exactly one method");
      fail_on(errors);
      fs::create_directories(cfg.out_dir);
      const LoadedStream stream = load_stream(cfg.stream, sweep_stream_seed(cfg.seed, 0));
      nlohmann::json meta = to_json(cfg.stream);
      meta["seed"] = sweep_stream_seed(cfg.seed, 0);
      std::vector<RunSummary> summaries;
      for (const auto& m : cfg.methods) {
        const RunRequest req = cfg.request(m);
        const std::string id = run_id.empty() ? run_id_for(req) : run_id;
        RunLog log = run_method(req, stream, id, meta);
        log.metadata["stream_id"] = cfg.stream.describe();
        const std::string path = (fs::path(cfg.out_dir) / (id + ".csv")).string();
        save_runlog(log, path);
        summaries.push_back(summarize(log));
      }
      print_summaries(summaries, out);
      return kExitOk;
    }

    if (*sweep) {
      SweepSpec spec;
      if (!manifest.empty()) {
        std::ifstream f(manifest);
        if (!f) fail_on({"manifest '" + manifest + "' does not exist"});
        const auto j = nlohmann::json::parse(f, nullptr, false);
        if (j.is_discarded()) fail_on({"manifest '" + manifest + "' is not valid JSON"});
        spec = sweep_spec_from_json(j);
      } else {
        std::vector<std::string> errors;
        ExperimentConfig cfg = sweep_flags.build(errors);
        try {
          spec.axis = sweep_axis_from_string(axis);
        } catch (const std::exception& e) {
          errors.emplace_back(e.what());
        }
        spec.values = split_list(values);
        if (spec.values.empty()) errors.push_back("--values is required");
        if (spec.axis != SweepAxis::strategy && cfg.methods.size() != 1)
          errors.push_back("--strategy must name one method for this axis");
        fail_on(errors);
        spec.id = sweep_id;
        spec.seeds = seeds;
        spec.master_seed = cfg.seed;
        spec.stream = cfg.stream;
        const std::string method = spec.axis == SweepAxis::strategy ? spec.values.front() : cfg.methods.front();
        spec.base = cfg.request(spec.axis == SweepAxis::strategy && !is_baseline_name(method) ? "T1" : method);
      }
      try {
        spec.validate();
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      const SweepResult result = run_sweep(spec, sweep_flags.out, jobs);
      out << "sweep " << spec.id << ": " << result.runs.size() << " runs, " << result.failures() << " failed -> "
          << result.directory << '\n';
      for (const auto& r : result.runs)
        if (!r.log) err << "run " << r.run_id << " failed: " << r.error << '\n';
      std::ifstream table(fs::path(result.directory) / "table.csv");
      out << table.rdbuf();
      return result.failures() == result.runs.size() ? kExitRuntime : kExitOk;
    }

    if (*detect) {
      EddmConfig c{alpha, min_errors, warmup};
      try {
        c.validate();
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      std::ifstream f(detect_in);
      if (!f) throw UsageError("input '" + detect_in + "' does not exist");
      const auto outcomes = read_correctness(f);
      for (std::size_t p : eddm_replay(outcomes, c, offset)) out << p << '\n';
      return kExitOk;
    }

    if (*report) {
      std::vector<std::string> errors;
      for (const auto& r : report_in)
        if (!fs::exists(r)) errors.push_back("run log '" + r + "' does not exist");
      if (!(tolerance >= 0.0)) errors.push_back("--tolerance must be non-negative");
      fail_on(errors);
      const auto logs = load_logs(report_in);
      if (logs.empty()) throw UsageError("no run logs found");
      ReportOptions options;
      options.recovery.tolerance = tolerance;
      options.title = title;
      print_summaries(render_report(logs, report_out, options), out);
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return cli_dispatch(args, std::cout, std::cerr);
}

}  // namespace autostream
