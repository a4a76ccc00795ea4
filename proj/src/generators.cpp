#include "autostream/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "autostream/random.hpp"

namespace autostream {

std::string to_string(Family family) { return family == Family::sea ? "sea" : "hyperplane"; }

Family family_from_string(const std::string& name) {
  if (name == "sea") return Family::sea;
  if (name == "hyperplane") return Family::hyperplane;
  throw std::invalid_argument("unknown stream family '" + name + "' (expected sea|hyperplane)");
}

std::string to_string(DriftKind kind) {
  switch (kind) {
    case DriftKind::none: return "none";
    case DriftKind::abrupt: return "abrupt";
    case DriftKind::gradual: return "gradual";
    case DriftKind::mixed: return "mixed";
  }
  return "none";
}

DriftKind drift_kind_from_string(const std::string& name) {
  if (name == "none") return DriftKind::none;
  if (name == "abrupt") return DriftKind::abrupt;
  if (name == "gradual") return DriftKind::gradual;
  if (name == "mixed") return DriftKind::mixed;
  throw std::invalid_argument("unknown drift kind '" + name + "' (expected none|abrupt|gradual|mixed)");
}

std::size_t DriftComponent::begin() const { return width <= 1 ? center : center - width / 2; }
std::size_t DriftComponent::end() const { return begin() + std::max<std::size_t>(width, 1); }

namespace {

bool same_family(const Concept& c, Family family) {
  return family == Family::sea ? std::holds_alternative<SeaConcept>(c)
                               : std::holds_alternative<HyperplaneConcept>(c);
}

void check_concept(const Concept& c, Family family, const std::string& what,
                   std::vector<std::string>& errors, std::size_t& dim) {
  if (!same_family(c, family)) {
    errors.push_back(what + " concept does not belong to family " + to_string(family));
    return;
  }
  if (const auto* sea = std::get_if<SeaConcept>(&c)) {
    if (!(sea->threshold > 0.0 && sea->threshold < 20.0))
      errors.push_back(what + " SEA threshold must lie in (0, 20)");
    return;
  }
  const auto& hp = std::get<HyperplaneConcept>(c);
  if (hp.weights.empty() || std::all_of(hp.weights.begin(), hp.weights.end(), [](double w) { return w == 0.0; }))
    errors.push_back(what + " hyperplane weight vector is all zero");
  if (dim == 0) dim = hp.weights.size();
  else if (hp.weights.size() != dim)
    errors.push_back(what + " hyperplane dimension differs from the base concept");
}

HyperplaneConcept interpolate(const HyperplaneConcept& a, const HyperplaneConcept& b, double f) {
  HyperplaneConcept out;
  out.weights.resize(a.weights.size());
  double norm = 0.0;
  for (std::size_t i = 0; i < a.weights.size(); ++i) {
    out.weights[i] = (1.0 - f) * a.weights[i] + f * b.weights[i];
    norm += out.weights[i] * out.weights[i];
  }
  out.offset = (1.0 - f) * a.offset + f * b.offset;
  norm = std::sqrt(norm);
  if (norm > 0.0) {
    for (double& w : out.weights) w /= norm;
    out.offset /= norm;
  }
  return out;
}

std::size_t feature_dim(const Concept& c) {
  if (std::holds_alternative<SeaConcept>(c)) return 3;
  return std::get<HyperplaneConcept>(c).weights.size();
}

void draw_features(Rng& rng, const Concept& c, std::vector<double>& x) {
  const bool sea = std::holds_alternative<SeaConcept>(c);
  x.resize(feature_dim(c));
  for (double& v : x) v = sea ? rng.uniform(0.0, 10.0) : rng.uniform();
}

}  // namespace

void DriftSpec::validate(std::size_t n, Family family) const {
  std::vector<std::string> errors;
  std::size_t dim = 0;
  check_concept(base, family, "base", errors, dim);
  const auto n_abrupt = std::count_if(components.begin(), components.end(),
                                      [](const DriftComponent& c) { return c.abrupt(); });
  const auto n_gradual = static_cast<std::ptrdiff_t>(components.size()) - n_abrupt;
  switch (kind) {
    case DriftKind::none:
      if (!components.empty()) errors.push_back("kind none must have no drift components");
      break;
    case DriftKind::abrupt:
      if (components.size() != 1 || n_abrupt != 1)
        errors.push_back("abrupt drift needs exactly one component with window w = 1");
      break;
    case DriftKind::gradual:
      if (components.empty() || n_abrupt != 0)
        errors.push_back("gradual drift needs >= 1 component, each with window w >= 2");
      break;
    case DriftKind::mixed:
      if (n_abrupt != 1 || n_gradual < 1)
        errors.push_back("mixed drift needs exactly one abrupt component plus >= 1 gradual components");
      break;
  }
  if (magnitude_level < 0 || magnitude_level > 4) errors.push_back("magnitude_level must be 0 (custom) or 1..4");
  const Concept* previous = &base;
  std::size_t previous_end = 0;
  for (std::size_t i = 0; i < components.size(); ++i) {
    const auto& c = components[i];
    const std::string tag = "component " + std::to_string(i);
    if (c.width == 0) errors.push_back(tag + " has window 0");
    if (c.width > 1 && c.center < c.width / 2) errors.push_back(tag + " starts before instance 0");
    if (c.abrupt() && c.center == 0) errors.push_back(tag + " abrupt drift at instance 0");
    if (c.width >= 1 && c.end() > n) errors.push_back(tag + " interval extends past the stream length " + std::to_string(n));
    if (i > 0 && c.begin() < previous_end) errors.push_back(tag + " overlaps the previous drift interval");
    check_concept(c.from, family, tag + " from", errors, dim);
    check_concept(c.to, family, tag + " to", errors, dim);
    if (!(c.from == *previous)) errors.push_back(tag + " does not start from the preceding concept");
    previous = &c.to;
    previous_end = c.end();
  }
  if (!errors.empty()) {
    std::string message = "invalid drift spec:";
    for (const auto& e : errors) message += "\n  - " + e;
    throw std::invalid_argument(message);
  }
}

int sea_label(std::span<const double> x, const SeaConcept& c) {
  if (x.size() < 2) throw std::invalid_argument("SEA instance needs at least 2 features");
  return x[0] + x[1] <= c.threshold ? 1 : 0;
}

int hyperplane_label(std::span<const double> x, const HyperplaneConcept& c) {
  if (x.size() != c.weights.size())
    throw std::invalid_argument("hyperplane dimension mismatch: instance has " + std::to_string(x.size()) +
                                " features, concept " + std::to_string(c.weights.size()));
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += c.weights[i] * x[i];
  return sum >= c.offset ? 1 : 0;
}

int concept_label(std::span<const double> x, const Concept& c) {
  if (const auto* sea = std::get_if<SeaConcept>(&c)) return sea_label(x, *sea);
  return hyperplane_label(x, std::get<HyperplaneConcept>(c));
}

double concept_mix_weight(std::size_t t, const DriftComponent& c) {
  if (c.width <= 1) return t >= c.center ? 1.0 : 0.0;
  const std::size_t b = c.begin();
  if (t <= b) return 0.0;
  const double w = static_cast<double>(t - b) / static_cast<double>(c.width);
  return std::min(1.0, w);
}

double concept_mix_weight(std::size_t t, const DriftSpec& spec) {
  if (spec.components.empty()) return 0.0;
  return concept_mix_weight(t, spec.components.front());
}

GeneratedStream generate_stream(Family family, std::size_t n, const DriftSpec& spec, const NoiseSpec& noise,
                                std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("stream length must be at least 1");
  if (!(noise.label_flip_rate >= 0.0 && noise.label_flip_rate <= 1.0))
    throw std::invalid_argument("label_flip_rate must lie in [0, 1]");
  spec.validate(n, family);

  GeneratedStream out;
  const std::size_t dim = feature_dim(spec.base);
  out.schema = StreamSchema::numeric(dim, 2);
  for (const auto& c : spec.components) out.drift_positions.push_back(c.center);
  out.instances.reserve(n);

  Rng rng(seed);
  std::size_t next = 0;  // first component not yet fully applied
  Concept current = spec.base;
  std::vector<double> x;
  for (std::size_t t = 0; t < n; ++t) {
    while (next < spec.components.size() && t >= spec.components[next].end()) {
      current = spec.components[next].to;
      ++next;
    }
    draw_features(rng, current, x);
    const double mix_draw = rng.uniform();
    const double noise_draw = rng.uniform();

    int label;
    if (next < spec.components.size() && t >= spec.components[next].begin()) {
      const auto& c = spec.components[next];
      const double w = concept_mix_weight(t, c);
      if (family == Family::hyperplane) {
        label = hyperplane_label(x, interpolate(std::get<HyperplaneConcept>(c.from),
                                                std::get<HyperplaneConcept>(c.to), w));
      } else {
        label = concept_label(x, mix_draw < w ? c.to : c.from);
      }
    } else {
      label = concept_label(x, current);
    }
    if (noise_draw < noise.label_flip_rate) label = 1 - label;
    out.instances.push_back(Instance{x, label});
  }
  return out;
}

double concept_distance(const Concept& a, const Concept& b, std::size_t n_samples, std::uint64_t seed) {
  if (a.index() != b.index()) throw std::invalid_argument("concept_distance: concepts from different families");
  if (feature_dim(a) != feature_dim(b)) throw std::invalid_argument("concept_distance: dimension mismatch");
  if (n_samples < 1) throw std::invalid_argument("concept_distance: n_samples must be at least 1");
  Rng rng(seed);
  std::vector<double> x;
  std::size_t disagree = 0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    draw_features(rng, a, x);
    if (concept_label(x, a) != concept_label(x, b)) ++disagree;
  }
  return static_cast<double>(disagree) / static_cast<double>(n_samples);
}

std::vector<SeaConcept> sea_functions() { return {{8.0}, {9.0}, {7.0}, {9.5}}; }

HyperplaneConcept hyperplane_rotation(double angle, std::size_t dim) {
  // Rotates the all-ones normal toward the alternating-sign normal; both pass
  // through the cube centre so every concept is class-balanced.
  HyperplaneConcept c;
  c.weights.resize(dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  double sum = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double along = scale;
    const double across = (i % 2 == 0 ? 1.0 : -1.0) * scale;
    c.weights[i] = std::cos(angle) * along + std::sin(angle) * across;
    sum += c.weights[i];
  }
  c.offset = 0.5 * sum;
  return c;
}

namespace {

struct RankedPair {
  std::size_t from;
  std::size_t to;
  double distance;
};

const std::vector<RankedPair>& sea_ranked_pairs() {
  static const std::vector<RankedPair> ranked = [] {
    const auto fns = sea_functions();
    std::vector<RankedPair> pairs;
    for (std::size_t i = 0; i < fns.size(); ++i)
      for (std::size_t j = i + 1; j < fns.size(); ++j)
        pairs.push_back({i, j, concept_distance(fns[i], fns[j], 400000, 0x5ea5eaULL)});
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const RankedPair& a, const RankedPair& b) { return a.distance < b.distance; });
    return pairs;
  }();
  return ranked;
}

}  // namespace

std::pair<Concept, Concept> magnitude_pair(Family family, int level) {
  if (level < 1 || level > 4) throw std::invalid_argument("magnitude level must be 1..4");
  if (family == Family::hyperplane)
    return {hyperplane_rotation(0.0), hyperplane_rotation(level * std::numbers::pi / 8.0)};
  static constexpr std::size_t kRanks[4] = {0, 2, 4, 5};
  const auto& pair = sea_ranked_pairs()[kRanks[level - 1]];
  const auto fns = sea_functions();
  return {fns[pair.from], fns[pair.to]};
}

DriftSpec make_drift_spec(Family family, DriftKind kind, std::size_t n, std::size_t center, std::size_t width,
                          int magnitude_level) {
  DriftSpec spec;
  spec.kind = kind;
  const int level = magnitude_level == 0 ? 4 : magnitude_level;
  const auto [from, to] = magnitude_pair(family, level);
  spec.base = from;
  switch (kind) {
    case DriftKind::none:
      spec.magnitude_level = 0;
      return spec;
    case DriftKind::abrupt:
      spec.magnitude_level = level;
      spec.components.push_back({center, 1, from, to});
      return spec;
    case DriftKind::gradual:
      spec.magnitude_level = level;
      spec.components.push_back({center, std::max<std::size_t>(width, 2), from, to});
      return spec;
    case DriftKind::mixed: break;
  }
  // Mixed: gradual lead-in, abrupt switch at `center`, gradual follow-up.
  spec.magnitude_level = level;
  Concept before, after;
  if (family == Family::sea) {
    std::vector<SeaConcept> others;
    for (const auto& f : sea_functions())
      if (!(Concept(f) == from) && !(Concept(f) == to)) others.push_back(f);
    before = others.front();
    after = others.size() > 1 ? others[1] : others.front();
  } else {
    const double angle = level * std::numbers::pi / 8.0;
    before = hyperplane_rotation(-angle / 2.0);
    after = hyperplane_rotation(angle * 1.5);
  }
  const std::size_t quarter = n / 4;
  const std::size_t w = std::max<std::size_t>(2, width);
  spec.base = before;
  spec.components.push_back({center >= quarter ? center - quarter : center / 2, w, before, from});
  spec.components.push_back({center, 1, from, to});
  spec.components.push_back({std::min(center + quarter, n - 1), w, to, after});
  return spec;
}

std::vector<std::size_t> drift_batches(std::span<const std::size_t> positions, std::size_t batch_size) {
  std::vector<std::size_t> out;
  for (auto p : positions) out.push_back(batch_size ? p / batch_size : 0);
  return out;
}

}  // namespace autostream
