#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "autostream/learners.hpp"
#include "autostream/pipeline_space.hpp"
#include "autostream/stream.hpp"

namespace autostream {

enum class Paradigm { random_stack, smbo, evo };
enum class StackerKind { linear, gbm };
enum class CombinerKind { weighted_vote, greedy_selection, stacker };

std::string to_string(Paradigm p);
std::string to_string(StackerKind s);
std::string to_string(CombinerKind c);
Paradigm paradigm_from_string(const std::string& name);
StackerKind stacker_from_string(const std::string& name);

struct SearchBudget {
  std::optional<double> wall_clock_seconds;
  std::optional<std::size_t> max_evaluations;
  // Share of the wall-clock budget held back for ensemble construction.
  double ensemble_reserve = 0.2;

  static SearchBudget evaluations(std::size_t n) { return {std::nullopt, n, 0.2}; }
  static SearchBudget seconds(double s) { return {s, std::nullopt, 0.2}; }
  void validate() const;
};

struct EvalRecord {
  PipelineConfig config;
  std::uint64_t config_hash = 0;
  double holdout_score = 0.0;
  double fit_seconds = 0.0;
  bool warm = false;
};

enum class FitRole { member, meta, incremental };

// Called with every dataset a model is trained on; used by purity audits.
using FitObserver = std::function<void(const Dataset& data, FitRole role)>;

struct EnsembleModel {
  CombinerKind combiner = CombinerKind::weighted_vote;
  StackerKind stacker_kind = StackerKind::linear;
  std::vector<TrainedModel> members;
  std::vector<double> weights;      // vote weights; empty for a stacker
  std::optional<TrainedModel> meta;  // stacker only
  bool single_fallback = false;     // stacker requested with fewer than 2 members
  std::size_t n_classes = 2;

  bool degenerate() const;
  void predict_proba(std::span<const double> raw, std::span<double> out) const;
  Predictions predict(const Dataset& data) const;
};

struct FittedAutoML {
  Paradigm paradigm = Paradigm::random_stack;
  SearchSpace space;
  EnsembleModel ensemble;
  PipelineConfig incumbent;
  double incumbent_score = 0.0;
  std::vector<EvalRecord> history;

  std::vector<PipelineConfig> member_configs() const;
  // Distinct configs by descending holdout score, ties to the earliest.
  std::vector<PipelineConfig> top_configs(std::size_t k) const;
};

struct SearchOptions {
  SearchSpace space = SearchSpace::defaults();
  SearchBudget budget = SearchBudget::evaluations(20);
  std::uint64_t seed = 0;
  std::vector<PipelineConfig> warm_configs;
  StackerKind stacker = StackerKind::linear;
  bool deduplicate = true;
  double holdout_fraction = 0.25;
  FitObserver observer;
};

// Warm configs, then uniform samples; the top five models feed a stacker.
FittedAutoML random_search_stack(const Dataset& data, const SearchOptions& options);
// Random-forest surrogate with expected improvement; greedy ensemble selection.
FittedAutoML smbo_search(const Dataset& data, const SearchOptions& options);
// Steady-state evolution, population 20; weighted vote of the top five.
FittedAutoML evo_search(const Dataset& data, const SearchOptions& options);
FittedAutoML run_search(Paradigm paradigm, const Dataset& data, const SearchOptions& options);

// Seed used to fit a config during search and refit; depends only on the config.
std::uint64_t config_fit_seed(const PipelineConfig& config);

// `candidates` ordered best first with their holdout scores.
EnsembleModel build_ensemble(std::vector<TrainedModel> candidates, std::span<const double> scores,
                             const Dataset& holdout, CombinerKind combiner, StackerKind stacker,
                             const FitObserver& observer = {});

// Forward selection with replacement over member probability matrices;
// returns the chosen indices of the most accurate prefix.
std::vector<std::size_t> greedy_selection(std::span<const Matrix> member_proba, std::span<const int> y,
                                          std::size_t rounds);

// Recomputes vote weights, greedy counts or the meta-model for the members
// already in `ensemble`, using `holdout` only.
void recombine_ensemble(EnsembleModel& ensemble, const Dataset& holdout, const FitObserver& observer = {});

// Member configs refitted from scratch on `data`'s train split; the combiner
// is recomputed on its holdout.
FittedAutoML refit(const FittedAutoML& fitted, const Dataset& data, const FitObserver& observer = {},
                   double holdout_fraction = 0.25);

// Members updated with partial_fit on the train split; combiner recomputed on
// the holdout. Throws if a member is not incremental-capable.
FittedAutoML partial_fit_ensemble(const FittedAutoML& fitted, const Dataset& data, std::uint64_t seed,
                                  const FitObserver& observer = {}, double holdout_fraction = 0.25);

void write_history_csv(const FittedAutoML& fitted, std::ostream& out);

}  // namespace autostream
