#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace autostream {

class Rng;

enum class LearnerKind {
  decision_tree,
  random_forest,
  gradient_boosted_trees,
  gaussian_naive_bayes,
  logistic_sgd,
  knn,
};

std::string to_string(LearnerKind kind);
LearnerKind learner_kind_from_string(const std::string& name);
// Kinds that support partial_fit.
bool is_incremental(LearnerKind kind);
std::vector<LearnerKind> all_learner_kinds();

// Categorical values are kept as text; integer and real values as doubles.
using ParamValue = std::variant<double, std::string>;

struct HyperparamDomain {
  enum class Kind { categorical, integer, real };

  std::string name;
  Kind kind = Kind::real;
  std::vector<std::string> values;  // categorical
  double lo = 0.0;
  double hi = 1.0;
  bool log_scale = false;

  static HyperparamDomain categorical(std::string name, std::vector<std::string> values);
  static HyperparamDomain integer(std::string name, long lo, long hi);
  static HyperparamDomain real(std::string name, double lo, double hi, bool log_scale = false);

  void validate() const;
  bool contains(const ParamValue& value) const;
  // Number of distinct values; nullopt for continuous domains.
  std::optional<std::size_t> cardinality() const;
  ParamValue sample(Rng& rng) const;
  // A value different from `current` (when the domain has more than one).
  ParamValue resample_different(const ParamValue& current, Rng& rng) const;
  // Min-max position in [0, 1]; log-scaled first where declared.
  double normalized(const ParamValue& value) const;
  std::vector<ParamValue> enumerate() const;
};

struct LearnerChoice {
  LearnerKind kind;
  std::vector<HyperparamDomain> params;
};

// One point of the CASH space: learner, its hyperparameters, preprocessing.
class PipelineConfig {
 public:
  LearnerKind learner = LearnerKind::decision_tree;
  std::map<std::string, ParamValue> params;
  std::map<std::string, ParamValue> preprocessing;

  // Canonical, address-free text form; equal configs render identically.
  std::string canonical() const;
  std::uint64_t hash() const;

  double number(const std::string& name, double fallback) const;
  std::string text(const std::string& name, const std::string& fallback) const;
  double preproc_number(const std::string& name, double fallback) const;
  std::string preproc_text(const std::string& name, const std::string& fallback) const;

  bool operator==(const PipelineConfig& other) const {
    return learner == other.learner && params == other.params && preprocessing == other.preprocessing;
  }
};

struct SearchSpace {
  std::vector<LearnerChoice> learners;
  std::vector<HyperparamDomain> preprocessors;
  bool restricted_incremental = false;

  // All six learners with their default domains.
  static SearchSpace defaults();
  // Same domains restricted to random_forest and gradient_boosted_trees.
  SearchSpace restrict_to_incremental() const;

  void validate() const;
  const LearnerChoice* find(LearnerKind kind) const;
  // Number of configs when every domain is discrete; nullopt otherwise.
  std::optional<std::size_t> size() const;
  std::vector<PipelineConfig> enumerate() const;
  std::size_t encoding_size() const;
};

bool is_valid(const PipelineConfig& config, const SearchSpace& space);

PipelineConfig sample_config(const SearchSpace& space, Rng& rng);
PipelineConfig sample_config(const SearchSpace& space, std::uint64_t seed);

// One gene resampled (p = 0.8) or the learner swapped with fresh
// hyperparameters (p = 0.2). Falls back to whichever move is possible.
PipelineConfig mutate_config(const PipelineConfig& config, const SearchSpace& space, Rng& rng);
PipelineConfig mutate_config(const PipelineConfig& config, const SearchSpace& space, std::uint64_t seed);

// Uniform crossover per field.
PipelineConfig crossover_configs(const PipelineConfig& a, const PipelineConfig& b, const SearchSpace& space,
                                 Rng& rng);

// One-hot learner, min-max scaled hyperparameters, -1 for inactive slots.
std::vector<double> encode_config(const PipelineConfig& config, const SearchSpace& space);

// Default hyperparameters for a learner kind (used by baselines).
PipelineConfig default_config(LearnerKind kind);

nlohmann::json to_json(const SearchSpace& space);
SearchSpace space_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PipelineConfig& config);
PipelineConfig config_from_json(const nlohmann::json& j);

}  // namespace autostream
