#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "autostream/stream.hpp"

namespace autostream {

enum class Family { sea, hyperplane };

std::string to_string(Family family);
Family family_from_string(const std::string& name);

// Positive iff x1 + x2 <= threshold, features uniform on [0, 10].
struct SeaConcept {
  double threshold = 8.0;
  bool operator==(const SeaConcept&) const = default;
};

// Positive iff sum_i w_i x_i >= offset, features uniform on [0, 1].
struct HyperplaneConcept {
  std::vector<double> weights;
  double offset = 0.0;
  bool operator==(const HyperplaneConcept&) const = default;
};

using Concept = std::variant<SeaConcept, HyperplaneConcept>;

enum class DriftKind { none, abrupt, gradual, mixed };

std::string to_string(DriftKind kind);
DriftKind drift_kind_from_string(const std::string& name);

// One transition between two concepts. `center` is the instance index of the
// midpoint, `width` the number of instances the transition spans (1 = abrupt).
struct DriftComponent {
  std::size_t center = 0;
  std::size_t width = 1;
  Concept from;
  Concept to;

  bool abrupt() const { return width == 1; }
  std::size_t begin() const;  // first instance with non-zero weight on `to`
  std::size_t end() const;    // first instance with full weight on `to`
};

struct DriftSpec {
  DriftKind kind = DriftKind::none;
  Concept base = SeaConcept{};  // concept before any drift
  std::vector<DriftComponent> components;
  int magnitude_level = 0;  // 1..4 for built-in ladders, 0 when custom

  // Throws std::invalid_argument naming every violated bound.
  void validate(std::size_t n, Family family) const;
};

struct NoiseSpec {
  double label_flip_rate = 0.0;
};

int sea_label(std::span<const double> x, const SeaConcept& c);
int hyperplane_label(std::span<const double> x, const HyperplaneConcept& c);
int concept_label(std::span<const double> x, const Concept& c);

// Probability of sampling the component's `to` concept at instance t: 0 before
// the interval, a linear ramp across it, 1 after. Abrupt: a step at center.
double concept_mix_weight(std::size_t t, const DriftComponent& component);
// Single-drift convenience; 0 for kind == none.
double concept_mix_weight(std::size_t t, const DriftSpec& spec);

struct GeneratedStream {
  StreamSchema schema;
  std::vector<Instance> instances;
  std::vector<std::size_t> drift_positions;  // component centers, instance units
};

inline constexpr std::size_t kHyperplaneDim = 10;

// SEA concepts are mixed probabilistically across a drift interval; the
// hyperplane is rotated by interpolating (w, w0) and renormalizing.
GeneratedStream generate_stream(Family family, std::size_t n, const DriftSpec& spec,
                                const NoiseSpec& noise, std::uint64_t seed);

// Monte-Carlo estimate of P(label_a(x) != label_b(x)) under the family's
// feature distribution.
double concept_distance(const Concept& a, const Concept& b, std::size_t n_samples, std::uint64_t seed);

// The four classic SEA functions: thresholds 8, 9, 7, 9.5.
std::vector<SeaConcept> sea_functions();

// Built-in magnitude ladders, level 1 (lowest) to 4.
std::pair<Concept, Concept> magnitude_pair(Family family, int level);

HyperplaneConcept hyperplane_rotation(double angle_radians, std::size_t dim = kHyperplaneDim);

// Convenience constructors using the built-in ladders.
DriftSpec make_drift_spec(Family family, DriftKind kind, std::size_t n, std::size_t center,
                          std::size_t width, int magnitude_level);

// Ground-truth drift positions in batch units.
std::vector<std::size_t> drift_batches(std::span<const std::size_t> positions, std::size_t batch_size);

}  // namespace autostream
