#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "autostream/stream.hpp"

namespace autostream {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool is_missing_cell(std::string_view s) {
  s = trim(s);
  return s.empty() || s == "?" || s == "NA" || s == "NaN" || s == "nan" || s == "null";
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_integer(std::string_view s, long long& out) {
  s = trim(s);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("failed to format value");
  return std::string(buf, ptr);
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

IngestResult ingest_csv(const std::string& path, const SchemaHints& hints) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("'" + path + "' has no header row");
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2) throw std::runtime_error("'" + path + "' needs a label column and at least one feature");

  std::size_t label_col = header.size() - 1;
  if (hints.label_column) {
    const auto it = std::find_if(header.begin(), header.end(), [&](const std::string& h) {
      return trim(h) == *hints.label_column;
    });
    if (it == header.end()) throw std::runtime_error("label column '" + *hints.label_column + "' not found");
    label_col = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<std::vector<std::string>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw std::runtime_error("ragged row at line " + std::to_string(line_no) + ": expected " +
                               std::to_string(header.size()) + " cells, found " +
                               std::to_string(cells.size()));
    rows.push_back(std::move(cells));
  }

  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != label_col) feature_cols.push_back(c);

  IngestResult result;
  StreamSchema& schema = result.schema;
  const StreamSchema* fixed = hints.fixed_schema ? &*hints.fixed_schema : nullptr;
  if (fixed && fixed->n_features != feature_cols.size())
    throw std::runtime_error("file has " + std::to_string(feature_cols.size()) +
                             " feature columns, fixed schema declares " + std::to_string(fixed->n_features));

  schema.n_features = feature_cols.size();
  schema.feature_kinds.resize(schema.n_features);
  schema.category_names.resize(schema.n_features);
  for (std::size_t j = 0; j < feature_cols.size(); ++j)
    schema.feature_names.emplace_back(trim(header[feature_cols[j]]));

  // Column typing: numeric unless some present cell fails to parse.
  std::vector<std::map<std::string, int>> category_codes(schema.n_features);
  for (std::size_t j = 0; j < feature_cols.size(); ++j) {
    if (fixed) {
      schema.feature_kinds[j] = fixed->feature_kinds[j];
      schema.category_names[j] = fixed->category_names.size() > j ? fixed->category_names[j]
                                                                   : std::vector<std::string>{};
      for (std::size_t k = 0; k < schema.category_names[j].size(); ++k)
        category_codes[j][schema.category_names[j][k]] = static_cast<int>(k);
      continue;
    }
    bool numeric = true;
    for (const auto& row : rows) {
      double v;
      const auto& cell = row[feature_cols[j]];
      if (!is_missing_cell(cell) && !parse_double(cell, v)) {
        numeric = false;
        break;
      }
    }
    if (numeric) continue;
    for (const auto& row : rows) {
      const std::string value(trim(row[feature_cols[j]]));
      if (category_codes[j].emplace(value, static_cast<int>(schema.category_names[j].size())).second)
        schema.category_names[j].push_back(value);
    }
    schema.feature_kinds[j] = FeatureKind::categorical(std::max<std::size_t>(2, schema.category_names[j].size()));
  }

  // Labels: fixed schema wins; otherwise integer labels sort numerically and
  // anything else is coded by first appearance.
  std::map<std::string, int> label_codes;
  if (fixed) {
    schema.class_names = fixed->class_names;
  } else {
    bool all_int = !rows.empty();
    std::vector<std::pair<long long, std::string>> ints;
    for (const auto& row : rows) {
      long long v;
      const std::string value(trim(row[label_col]));
      if (!parse_integer(value, v)) {
        all_int = false;
        break;
      }
      ints.emplace_back(v, value);
    }
    if (all_int) {
      std::sort(ints.begin(), ints.end());
      ints.erase(std::unique(ints.begin(), ints.end(),
                             [](const auto& a, const auto& b) { return a.first == b.first; }),
                 ints.end());
      for (const auto& [v, text] : ints) schema.class_names.push_back(std::to_string(v));
    } else {
      for (const auto& row : rows) {
        const std::string value(trim(row[label_col]));
        if (std::find(schema.class_names.begin(), schema.class_names.end(), value) == schema.class_names.end())
          schema.class_names.push_back(value);
      }
    }
  }
  for (std::size_t k = 0; k < schema.class_names.size(); ++k) label_codes[schema.class_names[k]] = static_cast<int>(k);
  schema.n_classes = std::max<std::size_t>(2, schema.class_names.size());
  while (schema.class_names.size() < schema.n_classes)
    schema.class_names.push_back("__unused" + std::to_string(schema.class_names.size()));

  result.instances.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    Instance inst;
    inst.features.resize(schema.n_features);
    for (std::size_t j = 0; j < feature_cols.size(); ++j) {
      const std::string& cell = row[feature_cols[j]];
      if (schema.feature_kinds[j].is_categorical()) {
        const auto it = category_codes[j].find(std::string(trim(cell)));
        inst.features[j] = it == category_codes[j].end() ? kUnknownCategory : it->second;
      } else if (is_missing_cell(cell)) {
        inst.features[j] = kMissing;
      } else if (!parse_double(cell, inst.features[j])) {
        throw std::runtime_error("non-numeric value '" + cell + "' in numeric column '" +
                                 schema.feature_names[j] + "' at line " + std::to_string(r + 2));
      }
    }
    std::string label(trim(row[label_col]));
    auto it = label_codes.find(label);
    if (it == label_codes.end()) {
      long long v;
      if (parse_integer(label, v)) it = label_codes.find(std::to_string(v));
    }
    if (it == label_codes.end())
      throw std::runtime_error("unknown label value '" + label + "' at line " + std::to_string(r + 2));
    inst.label = it->second;
    result.instances.push_back(std::move(inst));
  }
  schema.validate();
  return result;
}

void export_csv(const std::string& path, const StreamSchema& schema, std::span<const Instance> instances) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  for (std::size_t j = 0; j < schema.n_features; ++j)
    out << quote_if_needed(j < schema.feature_names.size() ? schema.feature_names[j] : "x" + std::to_string(j)) << ',';
  out << "label\n";
  for (const auto& inst : instances) {
    check_instance(inst, schema);
    for (std::size_t j = 0; j < schema.n_features; ++j) {
      const double v = inst.features[j];
      const bool categorical = schema.feature_kinds[j].is_categorical();
      if (categorical && v >= 0 && j < schema.category_names.size() &&
          static_cast<std::size_t>(v) < schema.category_names[j].size()) {
        out << quote_if_needed(schema.category_names[j][static_cast<std::size_t>(v)]);
      } else if (!is_missing(v)) {
        out << format_double(v);
      }
      out << ',';
    }
    const auto label = static_cast<std::size_t>(inst.label);
    out << quote_if_needed(label < schema.class_names.size() ? schema.class_names[label] : std::to_string(label))
        << '\n';
  }
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace autostream
