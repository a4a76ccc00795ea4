#include "autostream/pipeline_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "autostream/random.hpp"

namespace autostream {

namespace {

struct KindName {
  LearnerKind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {LearnerKind::decision_tree, "decision_tree"},
    {LearnerKind::random_forest, "random_forest"},
    {LearnerKind::gradient_boosted_trees, "gradient_boosted_trees"},
    {LearnerKind::gaussian_naive_bayes, "gaussian_naive_bayes"},
    {LearnerKind::logistic_sgd, "logistic_sgd"},
    {LearnerKind::knn, "knn"},
};

std::string hex_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

std::string render(const ParamValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return "r:" + hex_double(*d);
  return "c:" + std::get<std::string>(v);
}

double as_number(const ParamValue& v, double fallback) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  try {
    return std::stod(std::get<std::string>(v));
  } catch (const std::exception&) {
    return fallback;
  }
}

std::string as_text(const ParamValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", std::get<double>(v));
  return buf;
}

nlohmann::json value_to_json(const ParamValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  return std::get<std::string>(v);
}

ParamValue value_from_json(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  return j.get<std::string>();
}

}  // namespace

std::string to_string(LearnerKind kind) {
  for (const auto& kn : kKindNames)
    if (kn.kind == kind) return kn.name;
  return "unknown";
}

LearnerKind learner_kind_from_string(const std::string& name) {
  for (const auto& kn : kKindNames)
    if (name == kn.name) return kn.kind;
  if (name == "gbm") return LearnerKind::gradient_boosted_trees;
  if (name == "rf") return LearnerKind::random_forest;
  throw std::invalid_argument("unknown learner kind '" + name + "'");
}

bool is_incremental(LearnerKind kind) {
  return kind == LearnerKind::random_forest || kind == LearnerKind::gradient_boosted_trees ||
         kind == LearnerKind::logistic_sgd;
}

std::vector<LearnerKind> all_learner_kinds() {
  std::vector<LearnerKind> out;
  for (const auto& kn : kKindNames) out.push_back(kn.kind);
  return out;
}

// ---- HyperparamDomain --------------------------------------------------------

HyperparamDomain HyperparamDomain::categorical(std::string name, std::vector<std::string> values) {
  HyperparamDomain d;
  d.name = std::move(name);
  d.kind = Kind::categorical;
  d.values = std::move(values);
  return d;
}

HyperparamDomain HyperparamDomain::integer(std::string name, long lo, long hi) {
  HyperparamDomain d;
  d.name = std::move(name);
  d.kind = Kind::integer;
  d.lo = static_cast<double>(lo);
  d.hi = static_cast<double>(hi);
  return d;
}

HyperparamDomain HyperparamDomain::real(std::string name, double lo, double hi, bool log_scale) {
  HyperparamDomain d;
  d.name = std::move(name);
  d.kind = Kind::real;
  d.lo = lo;
  d.hi = hi;
  d.log_scale = log_scale;
  return d;
}

void HyperparamDomain::validate() const {
  if (name.empty()) throw std::invalid_argument("hyperparameter without a name");
  if (kind == Kind::categorical) {
    if (values.size() < 2) throw std::invalid_argument("categorical '" + name + "' needs at least 2 values");
    return;
  }
  if (!(lo < hi)) throw std::invalid_argument("domain '" + name + "' needs lo < hi");
  if (log_scale && lo <= 0.0) throw std::invalid_argument("log-scaled domain '" + name + "' needs lo > 0");
  if (kind == Kind::integer && (std::floor(lo) != lo || std::floor(hi) != hi))
    throw std::invalid_argument("integer domain '" + name + "' needs integral bounds");
}

bool HyperparamDomain::contains(const ParamValue& value) const {
  if (kind == Kind::categorical) {
    const auto* s = std::get_if<std::string>(&value);
    return s && std::find(values.begin(), values.end(), *s) != values.end();
  }
  const auto* d = std::get_if<double>(&value);
  if (!d || !(*d >= lo && *d <= hi)) return false;
  return kind != Kind::integer || std::floor(*d) == *d;
}

std::optional<std::size_t> HyperparamDomain::cardinality() const {
  if (kind == Kind::categorical) return values.size();
  if (kind == Kind::integer) return static_cast<std::size_t>(hi - lo) + 1;
  return std::nullopt;
}

ParamValue HyperparamDomain::sample(Rng& rng) const {
  switch (kind) {
    case Kind::categorical: return values[rng.below(values.size())];
    case Kind::integer: return lo + static_cast<double>(rng.below(static_cast<std::uint64_t>(hi - lo) + 1));
    case Kind::real:
      if (log_scale) return std::exp(rng.uniform(std::log(lo), std::log(hi)));
      return rng.uniform(lo, hi);
  }
  return lo;
}

ParamValue HyperparamDomain::resample_different(const ParamValue& current, Rng& rng) const {
  const auto card = cardinality();
  if (card && *card <= 1) return current;
  if (kind == Kind::categorical) {
    const auto* s = std::get_if<std::string>(&current);
    std::vector<std::string> others;
    for (const auto& v : values)
      if (!s || v != *s) others.push_back(v);
    return others[rng.below(others.size())];
  }
  if (kind == Kind::integer) {
    const auto* d = std::get_if<double>(&current);
    const auto n = static_cast<std::uint64_t>(hi - lo) + 1;
    if (!d || !contains(current)) return sample(rng);
    // Draw from the n-1 other integers.
    double v = lo + static_cast<double>(rng.below(n - 1));
    if (v >= *d) v += 1.0;
    return v;
  }
  for (int attempt = 0; attempt < 100; ++attempt) {
    ParamValue v = sample(rng);
    if (!(v == current)) return v;
  }
  return sample(rng);
}

double HyperparamDomain::normalized(const ParamValue& value) const {
  if (kind == Kind::categorical) {
    const auto& s = std::get<std::string>(value);
    const auto it = std::find(values.begin(), values.end(), s);
    return static_cast<double>(it - values.begin()) / static_cast<double>(values.size() - 1);
  }
  const double v = std::get<double>(value);
  if (log_scale) return (std::log(v) - std::log(lo)) / (std::log(hi) - std::log(lo));
  return (v - lo) / (hi - lo);
}

std::vector<ParamValue> HyperparamDomain::enumerate() const {
  std::vector<ParamValue> out;
  if (kind == Kind::categorical) {
    for (const auto& v : values) out.emplace_back(v);
  } else if (kind == Kind::integer) {
    for (double v = lo; v <= hi; v += 1.0) out.emplace_back(v);
  } else {
    throw std::logic_error("cannot enumerate continuous domain '" + name + "'");
  }
  return out;
}

// ---- PipelineConfig ----------------------------------------------------------

std::string PipelineConfig::canonical() const {
  std::string out = "learner=" + to_string(learner);
  for (const auto& [k, v] : params) out += "|p:" + k + "=" + render(v);
  for (const auto& [k, v] : preprocessing) out += "|pre:" + k + "=" + render(v);
  return out;
}

std::uint64_t PipelineConfig::hash() const { return fnv1a64(canonical()); }

double PipelineConfig::number(const std::string& name, double fallback) const {
  const auto it = params.find(name);
  return it == params.end() ? fallback : as_number(it->second, fallback);
}

std::string PipelineConfig::text(const std::string& name, const std::string& fallback) const {
  const auto it = params.find(name);
  return it == params.end() ? fallback : as_text(it->second);
}

double PipelineConfig::preproc_number(const std::string& name, double fallback) const {
  const auto it = preprocessing.find(name);
  return it == preprocessing.end() ? fallback : as_number(it->second, fallback);
}

std::string PipelineConfig::preproc_text(const std::string& name, const std::string& fallback) const {
  const auto it = preprocessing.find(name);
  return it == preprocessing.end() ? fallback : as_text(it->second);
}

// ---- SearchSpace ---------------------------------------------------------------

SearchSpace SearchSpace::defaults() {
  using D = HyperparamDomain;
  SearchSpace s;
  s.learners = {
      {LearnerKind::decision_tree, {D::integer("max_depth", 1, 12), D::integer("min_samples_leaf", 2, 20)}},
      {LearnerKind::random_forest, {D::integer("n_trees", 10, 200), D::integer("max_depth", 1, 12)}},
      {LearnerKind::gradient_boosted_trees,
       {D::integer("n_trees", 10, 200), D::real("learning_rate", 0.01, 0.5, true), D::integer("max_depth", 1, 12)}},
      {LearnerKind::gaussian_naive_bayes, {D::real("var_smoothing", 1e-9, 1e-3, true)}},
      {LearnerKind::logistic_sgd, {D::real("learning_rate", 1e-4, 1e-1, true), D::real("l2", 1e-6, 1e-1, true)}},
      {LearnerKind::knn, {D::integer("k", 1, 25), D::categorical("weights", {"uniform", "distance"})}},
  };
  s.preprocessors = {D::categorical("standardize", {"off", "on"}),
                     D::categorical("variance_threshold", {"0", "0.0001"})};
  return s;
}

SearchSpace SearchSpace::restrict_to_incremental() const {
  SearchSpace s = *this;
  s.restricted_incremental = true;
  s.learners.clear();
  for (const auto& l : learners)
    if (l.kind == LearnerKind::random_forest || l.kind == LearnerKind::gradient_boosted_trees) s.learners.push_back(l);
  if (s.learners.empty()) {
    const auto d = defaults();
    for (const auto& l : d.learners)
      if (l.kind == LearnerKind::random_forest || l.kind == LearnerKind::gradient_boosted_trees) s.learners.push_back(l);
  }
  return s;
}

void SearchSpace::validate() const {
  if (learners.empty()) throw std::invalid_argument("search space has no learners");
  for (std::size_t i = 0; i < learners.size(); ++i) {
    for (std::size_t j = i + 1; j < learners.size(); ++j)
      if (learners[i].kind == learners[j].kind)
        throw std::invalid_argument("learner '" + to_string(learners[i].kind) + "' listed twice");
    if (restricted_incremental && learners[i].kind != LearnerKind::random_forest &&
        learners[i].kind != LearnerKind::gradient_boosted_trees)
      throw std::invalid_argument("restricted space may only contain random_forest and gradient_boosted_trees");
    for (const auto& d : learners[i].params) d.validate();
  }
  for (const auto& d : preprocessors) d.validate();
}

const LearnerChoice* SearchSpace::find(LearnerKind kind) const {
  for (const auto& l : learners)
    if (l.kind == kind) return &l;
  return nullptr;
}

std::optional<std::size_t> SearchSpace::size() const {
  std::size_t pre = 1;
  for (const auto& d : preprocessors) {
    const auto c = d.cardinality();
    if (!c) return std::nullopt;
    pre *= *c;
  }
  std::size_t total = 0;
  for (const auto& l : learners) {
    std::size_t n = 1;
    for (const auto& d : l.params) {
      const auto c = d.cardinality();
      if (!c) return std::nullopt;
      n *= *c;
    }
    total += n * pre;
  }
  return total;
}

namespace {

void expand(const std::vector<HyperparamDomain>& domains, std::size_t i, std::map<std::string, ParamValue>& current,
            std::vector<std::map<std::string, ParamValue>>& out) {
  if (i == domains.size()) {
    out.push_back(current);
    return;
  }
  for (const auto& v : domains[i].enumerate()) {
    current[domains[i].name] = v;
    expand(domains, i + 1, current, out);
  }
  current.erase(domains[i].name);
}

}  // namespace

std::vector<PipelineConfig> SearchSpace::enumerate() const {
  if (!size()) throw std::logic_error("search space has continuous domains and cannot be enumerated");
  std::vector<std::map<std::string, ParamValue>> pre;
  std::map<std::string, ParamValue> scratch;
  expand(preprocessors, 0, scratch, pre);
  std::vector<PipelineConfig> out;
  for (const auto& l : learners) {
    std::vector<std::map<std::string, ParamValue>> params;
    scratch.clear();
    expand(l.params, 0, scratch, params);
    for (const auto& p : params) {
      for (const auto& q : pre) {
        PipelineConfig c;
        c.learner = l.kind;
        c.params = p;
        c.preprocessing = q;
        out.push_back(std::move(c));
      }
    }
  }
  return out;
}

std::size_t SearchSpace::encoding_size() const {
  std::size_t n = learners.size() + preprocessors.size();
  for (const auto& l : learners) n += l.params.size();
  return n;
}

bool is_valid(const PipelineConfig& config, const SearchSpace& space) {
  const LearnerChoice* choice = space.find(config.learner);
  if (!choice) return false;
  if (config.params.size() != choice->params.size()) return false;
  for (const auto& d : choice->params) {
    const auto it = config.params.find(d.name);
    if (it == config.params.end() || !d.contains(it->second)) return false;
  }
  if (config.preprocessing.size() != space.preprocessors.size()) return false;
  for (const auto& d : space.preprocessors) {
    const auto it = config.preprocessing.find(d.name);
    if (it == config.preprocessing.end() || !d.contains(it->second)) return false;
  }
  return true;
}

namespace {

void sample_learner_params(const LearnerChoice& choice, PipelineConfig& config, Rng& rng) {
  config.learner = choice.kind;
  config.params.clear();
  for (const auto& d : choice.params) config.params[d.name] = d.sample(rng);
}

}  // namespace

PipelineConfig sample_config(const SearchSpace& space, Rng& rng) {
  if (space.learners.empty()) throw std::invalid_argument("search space has no learners");
  PipelineConfig config;
  sample_learner_params(space.learners[rng.below(space.learners.size())], config, rng);
  for (const auto& d : space.preprocessors) config.preprocessing[d.name] = d.sample(rng);
  return config;
}

PipelineConfig sample_config(const SearchSpace& space, std::uint64_t seed) {
  Rng rng(seed);
  return sample_config(space, rng);
}

PipelineConfig mutate_config(const PipelineConfig& config, const SearchSpace& space, Rng& rng) {
  const LearnerChoice* choice = space.find(config.learner);
  if (!choice) throw std::invalid_argument("config learner not in search space");

  struct Gene {
    const HyperparamDomain* domain;
    bool preproc;
  };
  std::vector<Gene> genes;
  for (const auto& d : choice->params)
    if (d.cardinality().value_or(2) > 1) genes.push_back({&d, false});
  for (const auto& d : space.preprocessors)
    if (d.cardinality().value_or(2) > 1) genes.push_back({&d, true});
  const bool can_swap = space.learners.size() > 1;

  const double draw = rng.uniform();
  const bool gene_move = (draw < 0.8 && !genes.empty()) || (!can_swap && !genes.empty());
  PipelineConfig out = config;
  if (gene_move) {
    const Gene& g = genes[rng.below(genes.size())];
    auto& slot = g.preproc ? out.preprocessing : out.params;
    slot[g.domain->name] = g.domain->resample_different(slot[g.domain->name], rng);
    return out;
  }
  if (!can_swap) return out;  // single-config space: nothing can change
  std::vector<const LearnerChoice*> others;
  for (const auto& l : space.learners)
    if (l.kind != config.learner) others.push_back(&l);
  sample_learner_params(*others[rng.below(others.size())], out, rng);
  return out;
}

PipelineConfig mutate_config(const PipelineConfig& config, const SearchSpace& space, std::uint64_t seed) {
  Rng rng(seed);
  return mutate_config(config, space, rng);
}

PipelineConfig crossover_configs(const PipelineConfig& a, const PipelineConfig& b, const SearchSpace& space,
                                 Rng& rng) {
  PipelineConfig out;
  if (a.learner == b.learner) {
    out.learner = a.learner;
    for (const auto& [k, v] : a.params) {
      const auto it = b.params.find(k);
      out.params[k] = (it != b.params.end() && rng.bernoulli(0.5)) ? it->second : v;
    }
  } else {
    const PipelineConfig& donor = rng.bernoulli(0.5) ? a : b;
    out.learner = donor.learner;
    out.params = donor.params;
  }
  for (const auto& d : space.preprocessors) {
    const auto ia = a.preprocessing.find(d.name);
    const auto ib = b.preprocessing.find(d.name);
    if (ia == a.preprocessing.end() || ib == b.preprocessing.end()) {
      out.preprocessing[d.name] = ia != a.preprocessing.end() ? ia->second : d.sample(rng);
      continue;
    }
    out.preprocessing[d.name] = rng.bernoulli(0.5) ? ib->second : ia->second;
  }
  return out;
}

std::vector<double> encode_config(const PipelineConfig& config, const SearchSpace& space) {
  std::vector<double> out;
  out.reserve(space.encoding_size());
  for (const auto& l : space.learners) out.push_back(l.kind == config.learner ? 1.0 : 0.0);
  for (const auto& l : space.learners) {
    for (const auto& d : l.params) {
      const auto it = config.params.find(d.name);
      if (l.kind != config.learner || it == config.params.end()) {
        out.push_back(-1.0);
      } else {
        out.push_back(d.normalized(it->second));
      }
    }
  }
  for (const auto& d : space.preprocessors) {
    const auto it = config.preprocessing.find(d.name);
    out.push_back(it == config.preprocessing.end() ? -1.0 : d.normalized(it->second));
  }
  return out;
}

PipelineConfig default_config(LearnerKind kind) {
  PipelineConfig c;
  c.learner = kind;
  switch (kind) {
    case LearnerKind::decision_tree:
      c.params = {{"max_depth", 8.0}, {"min_samples_leaf", 2.0}};
      break;
    case LearnerKind::random_forest:
      c.params = {{"n_trees", 20.0}, {"max_depth", 10.0}};
      break;
    case LearnerKind::gradient_boosted_trees:
      c.params = {{"n_trees", 50.0}, {"learning_rate", 0.1}, {"max_depth", 3.0}};
      break;
    case LearnerKind::gaussian_naive_bayes:
      c.params = {{"var_smoothing", 1e-9}};
      break;
    case LearnerKind::logistic_sgd:
      c.params = {{"learning_rate", 0.01}, {"l2", 1e-4}};
      break;
    case LearnerKind::knn:
      c.params = {{"k", 5.0}, {"weights", std::string("uniform")}};
      break;
  }
  c.preprocessing = {{"standardize", std::string("on")}, {"variance_threshold", std::string("0")}};
  return c;
}

// ---- JSON ----------------------------------------------------------------------

namespace {

nlohmann::json domain_to_json(const HyperparamDomain& d) {
  nlohmann::json j;
  j["name"] = d.name;
  switch (d.kind) {
    case HyperparamDomain::Kind::categorical:
      j["type"] = "categorical";
      j["values"] = d.values;
      break;
    case HyperparamDomain::Kind::integer:
      j["type"] = "integer";
      j["lo"] = static_cast<long>(d.lo);
      j["hi"] = static_cast<long>(d.hi);
      break;
    case HyperparamDomain::Kind::real:
      j["type"] = "real";
      j["lo"] = d.lo;
      j["hi"] = d.hi;
      j["log"] = d.log_scale;
      break;
  }
  return j;
}

HyperparamDomain domain_from_json(const nlohmann::json& j) {
  const std::string type = j.at("type").get<std::string>();
  const std::string name = j.at("name").get<std::string>();
  if (type == "categorical") return HyperparamDomain::categorical(name, j.at("values").get<std::vector<std::string>>());
  if (type == "integer") return HyperparamDomain::integer(name, j.at("lo").get<long>(), j.at("hi").get<long>());
  if (type == "real")
    return HyperparamDomain::real(name, j.at("lo").get<double>(), j.at("hi").get<double>(), j.value("log", false));
  throw std::invalid_argument("unknown domain type '" + type + "'");
}

}  // namespace

nlohmann::json to_json(const SearchSpace& space) {
  nlohmann::json j;
  j["restricted_incremental"] = space.restricted_incremental;
  j["learners"] = nlohmann::json::array();
  for (const auto& l : space.learners) {
    nlohmann::json lj;
    lj["kind"] = to_string(l.kind);
    lj["params"] = nlohmann::json::array();
    for (const auto& d : l.params) lj["params"].push_back(domain_to_json(d));
    j["learners"].push_back(lj);
  }
  j["preprocessors"] = nlohmann::json::array();
  for (const auto& d : space.preprocessors) j["preprocessors"].push_back(domain_to_json(d));
  return j;
}

SearchSpace space_from_json(const nlohmann::json& j) {
  SearchSpace s;
  s.restricted_incremental = j.value("restricted_incremental", false);
  for (const auto& lj : j.at("learners")) {
    LearnerChoice choice{learner_kind_from_string(lj.at("kind").get<std::string>()), {}};
    for (const auto& dj : lj.value("params", nlohmann::json::array())) choice.params.push_back(domain_from_json(dj));
    s.learners.push_back(std::move(choice));
  }
  for (const auto& dj : j.value("preprocessors", nlohmann::json::array())) s.preprocessors.push_back(domain_from_json(dj));
  s.validate();
  return s;
}

nlohmann::json to_json(const PipelineConfig& config) {
  nlohmann::json j;
  j["learner"] = to_string(config.learner);
  j["params"] = nlohmann::json::object();
  for (const auto& [k, v] : config.params) j["params"][k] = value_to_json(v);
  j["preprocessing"] = nlohmann::json::object();
  for (const auto& [k, v] : config.preprocessing) j["preprocessing"][k] = value_to_json(v);
  return j;
}

PipelineConfig config_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  c.learner = learner_kind_from_string(j.at("learner").get<std::string>());
  // Bound to locals: items() on a temporary would dangle inside the loop.
  const nlohmann::json params = j.value("params", nlohmann::json::object());
  const nlohmann::json prep = j.value("preprocessing", nlohmann::json::object());
  for (const auto& [k, v] : params.items()) c.params[k] = value_from_json(v);
  for (const auto& [k, v] : prep.items()) c.preprocessing[k] = value_from_json(v);
  return c;
}

}  // namespace autostream
