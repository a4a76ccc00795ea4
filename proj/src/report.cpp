#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "autostream/evaluation.hpp"

namespace fs = std::filesystem;

namespace autostream {

namespace {

constexpr double kWidth = 900.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 200.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

// Red is reserved for pipeline-change marks.
constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b",
                                    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string label_of(const RunLog& log) {
  if (log.metadata.contains("label") && log.metadata["label"].is_string()) return log.metadata["label"];
  return log.rows.empty() ? log.run_id() : log.rows.front().strategy;
}

std::string group_of(const RunLog& log) {
  if (log.metadata.contains("stream_id") && log.metadata["stream_id"].is_string()) return log.metadata["stream_id"];
  return "stream";
}

double nice_step(double range) {
  const double raw = range / 10.0;
  const double mag = std::pow(10.0, std::floor(std::log10(std::max(raw, 1.0))));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) return m * mag;
  return 10.0 * mag;
}

}  // namespace

std::string render_svg(const std::vector<const RunLog*>& logs, const std::string& title) {
  std::size_t xmin = 0, xmax = 1;
  double ymin = 1.0;
  bool any = false;
  for (const RunLog* log : logs)
    for (const auto& r : log->rows) {
      xmin = any ? std::min(xmin, r.batch_index) : r.batch_index;
      xmax = any ? std::max(xmax, r.batch_index) : std::max(r.batch_index, xmin + 1);
      ymin = std::min(ymin, r.accuracy);
      any = true;
    }
  if (xmax <= xmin) xmax = xmin + 1;
  ymin = std::max(0.0, std::floor(ymin * 10.0) / 10.0);
  if (ymin >= 1.0) ymin = 0.9;
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double b) { return kLeft + (b - static_cast<double>(xmin)) / static_cast<double>(xmax - xmin) * pw; };
  auto py = [&](double a) { return kTop + (1.0 - (a - ymin) / (1.0 - ymin)) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << fmt(kLeft) << "\" y=\"22\" font-size=\"14\">" << escape(title) << "</text>\n";

  // Axes and grid.
  for (int i = 0; i <= 10; ++i) {
    const double a = ymin + (1.0 - ymin) * i / 10.0;
    const double y = py(a);
    o << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(kLeft + pw) << "\" y2=\"" << fmt(y)
      << "\" stroke=\"#e0e0e0\"/>\n";
    o << "<text x=\"" << fmt(kLeft - 6) << "\" y=\"" << fmt(y + 4) << "\" text-anchor=\"end\">" << fmt(a) << "</text>\n";
  }
  const double step = nice_step(static_cast<double>(xmax - xmin));
  for (double b = std::ceil(static_cast<double>(xmin) / step) * step; b <= static_cast<double>(xmax); b += step) {
    o << "<line x1=\"" << fmt(px(b)) << "\" y1=\"" << fmt(kTop + ph) << "\" x2=\"" << fmt(px(b)) << "\" y2=\""
      << fmt(kTop + ph + 4) << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << fmt(px(b)) << "\" y=\"" << fmt(kTop + ph + 16) << "\" text-anchor=\"middle\">"
      << static_cast<long long>(b) << "</text>\n";
  }
  o << "<rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kTop) << "\" width=\"" << fmt(pw) << "\" height=\"" << fmt(ph)
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  o << "<text x=\"" << fmt(kLeft + pw / 2) << "\" y=\"" << fmt(kHeight - 12) << "\" text-anchor=\"middle\">batch index</text>\n";
  o << "<text transform=\"translate(16 " << fmt(kTop + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">accuracy</text>\n";

  // Ground-truth drift positions.
  if (!logs.empty() && logs.front()->metadata.contains("true_drift_batches"))
    for (const auto& d : logs.front()->metadata["true_drift_batches"]) {
      const double b = d.get<double>();
      if (b < static_cast<double>(xmin) || b > static_cast<double>(xmax)) continue;
      o << "<line class=\"true-drift\" x1=\"" << fmt(px(b)) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(px(b))
        << "\" y2=\"" << fmt(kTop + ph) << "\" stroke=\"#999999\" stroke-dasharray=\"4 3\"/>\n";
    }

  for (std::size_t i = 0; i < logs.size(); ++i) {
    const RunLog& log = *logs[i];
    const char* color = kPalette[i % std::size(kPalette)];
    o << "<polyline class=\"series\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < log.rows.size(); ++k)
      o << (k ? " " : "") << fmt(px(static_cast<double>(log.rows[k].batch_index))) << ',' << fmt(py(log.rows[k].accuracy));
    o << "\"/>\n";
    for (const auto& r : log.rows) {
      const double x = px(static_cast<double>(r.batch_index)), y = py(r.accuracy);
      if (r.drift_detected)
        o << "<circle class=\"drift\" cx=\"" << fmt(x) << "\" cy=\"" << fmt(y) << "\" r=\"3.5\" fill=\"" << color
          << "\" stroke=\"black\"/>\n";
      if (r.pipeline_changed)
        o << "<rect class=\"pipeline-change\" x=\"" << fmt(x - 2.5) << "\" y=\"" << fmt(y - 2.5)
          << "\" width=\"5\" height=\"5\" fill=\"red\"/>\n";
    }
    const double ly = kTop + 10.0 + 16.0 * static_cast<double>(i);
    const double lx = kLeft + pw + 12.0;
    o << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly) << "\" x2=\"" << fmt(lx + 20) << "\" y2=\"" << fmt(ly)
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << fmt(lx + 26) << "\" y=\"" << fmt(ly + 4) << "\">" << escape(label_of(log)) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_summary_csv(const std::vector<RunSummary>& summaries, std::ostream& out) {
  out << "run_id,label,strategy,paradigm,seed,batches,mean_accuracy,recovery_batches,retrains,drifts_flagged,"
         "pipeline_changes,total_fit_seconds\n";
  for (const auto& s : summaries)
    out << s.run_id << ',' << s.label << ',' << s.strategy << ',' << s.paradigm << ',' << s.seed << ',' << s.batches
        << ',' << format_number(s.mean_accuracy) << ',' << s.recovery_text() << ',' << s.retrains << ','
        << s.drifts_flagged << ',' << s.pipeline_changes << ',' << format_number(s.total_fit_seconds) << '\n';
}

std::vector<RunSummary> render_report(const std::vector<RunLog>& logs, const std::string& dir,
                                      const ReportOptions& options) {
  if (logs.empty()) throw std::invalid_argument("render_report needs at least one run log");
  const fs::path root(dir);
  fs::create_directories(root / "plots");

  std::map<std::string, std::vector<const RunLog*>> groups;
  std::vector<RunSummary> summaries;
  for (const auto& log : logs) {
    groups[group_of(log)].push_back(&log);
    summaries.push_back(summarize(log, std::nullopt, options.recovery));
  }
  for (const auto& [name, members] : groups) {
    std::string file;
    for (char c : name) file += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') ? c : '_';
    std::ofstream out(root / "plots" / (file + ".svg"), std::ios::binary);
    if (!out) throw std::runtime_error("cannot write plot for '" + name + "'");
    out << render_svg(members, options.title.empty() ? name : options.title + ": " + name);
  }
  std::ofstream out(root / "summary.csv", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + (root / "summary.csv").string() + "'");
  write_summary_csv(summaries, out);
  return summaries;
}

}  // namespace autostream
