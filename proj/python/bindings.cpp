#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "autostream/adaptation.hpp"
#include "autostream/eddm.hpp"
#include "autostream/evaluation.hpp"
#include "autostream/generators.hpp"
#include "autostream/version.hpp"

namespace py = pybind11;
using namespace autostream;

namespace {

StreamSource make_source(const std::string& family, std::size_t n, const std::string& drift, std::size_t center,
                         std::size_t width, int magnitude, double noise) {
  StreamSource s;
  s.family = family_from_string(family);
  s.n = n;
  s.drift = drift_kind_from_string(drift);
  s.center = center;
  s.width = width;
  s.magnitude = magnitude;
  s.noise = noise;
  std::vector<std::string> errors;
  s.validate(errors);
  if (!errors.empty()) {
    std::string msg;
    for (const auto& e : errors) msg += (msg.empty() ? "" : "; ") + e;
    throw std::invalid_argument(msg);
  }
  return s;
}

py::tuple generate(const std::string& family, std::size_t n, const std::string& drift, std::size_t center,
                   std::size_t width, int magnitude, double noise, std::uint64_t seed) {
  const LoadedStream stream = load_stream(make_source(family, n, drift, center, width, magnitude, noise), seed);
  const std::size_t d = stream.schema.n_features;
  py::array_t<double> x({stream.instances.size(), d});
  py::array_t<int> y(static_cast<py::ssize_t>(stream.instances.size()));
  auto xm = x.mutable_unchecked<2>();
  auto ym = y.mutable_unchecked<1>();
  for (std::size_t i = 0; i < stream.instances.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) xm(i, j) = stream.instances[i].features[j];
    ym(i) = stream.instances[i].label;
  }
  return py::make_tuple(x, y, stream.drift_positions);
}

py::dict run(const std::string& method, const std::string& family, std::size_t n, const std::string& drift,
             std::size_t center, std::size_t width, int magnitude, double noise, std::uint64_t seed,
             const std::string& paradigm, std::size_t budget_evals, std::optional<std::size_t> batch_size,
             std::optional<std::vector<std::size_t>> preset_drifts) {
  const LoadedStream stream = load_stream(make_source(family, n, drift, center, width, magnitude, noise), seed);
  RunRequest r;
  r.method = method;
  r.orchestrator.paradigm = paradigm_from_string(paradigm);
  r.orchestrator.budget = SearchBudget::evaluations(budget_evals);
  r.orchestrator.seed = seed;
  r.orchestrator.record_timings = false;
  r.orchestrator.preset_drifts = std::move(preset_drifts);
  r.orchestrator.batch_size =
      batch_size ? *batch_size
                 : (is_baseline_name(method) ? 1000
                                             : OrchestratorConfig::default_batch_size(strategy_from_string(method)));
  RunLog log;
  {
    py::gil_scoped_release release;
    log = run_method(r, stream, method + "-" + std::to_string(seed));
  }
  py::list rows;
  for (const auto& row : log.rows) {
    py::dict d;
    d["batch_index"] = row.batch_index;
    d["accuracy"] = row.accuracy;
    d["drift_detected"] = row.drift_detected;
    d["retrained"] = row.retrained;
    d["pipeline_changed"] = row.pipeline_changed;
    rows.append(d);
  }
  py::dict out;
  out["run_id"] = log.run_id();
  out["mean_accuracy"] = log.mean_accuracy();
  out["rows"] = rows;
  out["metadata"] = log.metadata.dump();
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "AutoML adaptation strategies on drifting data streams";
  m.attr("__version__") = kVersion;

  m.def("generate", &generate, py::arg("family") = "sea", py::arg("n") = 100000, py::arg("drift") = "abrupt",
        py::arg("center") = 50000, py::arg("width") = 1, py::arg("magnitude") = 4, py::arg("noise") = 0.0,
        py::arg("seed") = 0, "Synthetic stream as (X, y, drift_positions).");

  m.def(
      "eddm_replay",
      [](const std::vector<int>& correct, double alpha, std::size_t min_errors, std::size_t warmup,
         std::size_t offset) {
        EddmConfig cfg{alpha, min_errors, warmup};
        cfg.validate();
        std::vector<std::uint8_t> flags(correct.size());
        for (std::size_t i = 0; i < correct.size(); ++i) {
          if (correct[i] != 0 && correct[i] != 1) throw std::invalid_argument("outcomes must be 0 or 1");
          flags[i] = static_cast<std::uint8_t>(correct[i]);
        }
        return eddm_replay(flags, cfg, offset);
      },
      py::arg("correct"), py::arg("alpha") = 0.95, py::arg("min_errors") = 30, py::arg("warmup") = 1000,
      py::arg("offset") = 0, "Alarm positions for a 0/1 prediction-outcome sequence.");

  m.def(
      "concept_distance",
      [](const std::string& family, int level, std::size_t samples, std::uint64_t seed) {
        const auto [a, b] = magnitude_pair(family_from_string(family), level);
        return concept_distance(a, b, samples, seed);
      },
      py::arg("family"), py::arg("level"), py::arg("samples") = 100000, py::arg("seed") = 0,
      "Disagreement probability of the built-in concept pair for a magnitude level.");

  m.def("run", &run, py::arg("method"), py::arg("family") = "sea", py::arg("n") = 100000,
        py::arg("drift") = "abrupt", py::arg("center") = 50000, py::arg("width") = 1, py::arg("magnitude") = 4,
        py::arg("noise") = 0.0, py::arg("seed") = 0, py::arg("paradigm") = "smbo", py::arg("budget_evals") = 20,
        py::arg("batch_size") = py::none(), py::arg("preset_drifts") = py::none(),
        "Runs one strategy or baseline on a generated stream.");

  m.def("strategies", [] {
    std::vector<std::string> out;
    for (StrategyKind s : all_strategies()) out.push_back(strategy_code(s));
    for (const char* b : {"OZA", "BLAST", "GBM"}) out.emplace_back(b);
    return out;
  });

}
