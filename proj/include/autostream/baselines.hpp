#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "autostream/adaptation.hpp"
#include "autostream/eddm.hpp"
#include "autostream/learners.hpp"
#include "autostream/runlog.hpp"
#include "autostream/stream.hpp"

namespace autostream {

enum class BaselineKind { oza, blast, gbm };

// Run-log strategy names: OZA, BLAST, GBM.
std::string baseline_code(BaselineKind kind);
BaselineKind baseline_from_string(const std::string& name);

enum class OzaBase { hoeffding_tree, logistic };

// Poisson(1) count for one (instance, member) pair. Counter-based, so update
// counts depend only on the seed and the stream position.
int oza_poisson_draw(std::uint64_t seed, std::size_t position, std::size_t member);

class OnlineMember;

// Online bagging: every instance trains each member k ~ Poisson(1) times.
class OzaEnsemble {
 public:
  OzaEnsemble(const StreamSchema& schema, std::size_t members, OzaBase base, std::uint64_t seed);
  ~OzaEnsemble();
  OzaEnsemble(OzaEnsemble&&) noexcept;
  OzaEnsemble& operator=(OzaEnsemble&&) noexcept;

  void train(const Dataset& data, const FitObserver& observer = {});
  // Majority vote; ties go to the lowest class index.
  std::vector<int> predict(const Dataset& data) const;
  std::vector<int> member_predictions(std::span<const double> row) const;
  std::size_t member_count() const { return members_.size(); }
  // Total weighted updates applied to member m.
  double member_updates(std::size_t m) const;

 private:
  std::size_t n_classes_;
  std::size_t n_members_;
  OzaBase base_;
  std::uint64_t seed_;
  FeaturePipeline prep_;
  bool fitted_ = false;
  std::vector<std::unique_ptr<OnlineMember>> members_;
};

// One default-hyperparameter pipeline per learner kind; the member that was
// most accurate on the previous batch predicts the current one.
class BlastPool {
 public:
  BlastPool(const StreamSchema& schema, std::uint64_t seed);

  void pretrain(const Dataset& data, const FitObserver& observer = {});
  // Predicts with the active member, then scores and updates every member
  // and selects the next active one. Returns the active member's labels.
  std::vector<int> step(const Dataset& data, const FitObserver& observer = {});

  std::size_t active() const { return active_; }
  std::size_t size() const { return members_.size(); }
  const std::vector<double>& last_accuracies() const { return accuracies_; }
  const TrainedModel& member(std::size_t i) const { return members_[i]; }

  // Argmax with ties to the lowest index.
  static std::size_t select(std::span<const double> accuracies);

 private:
  std::vector<PipelineConfig> configs_;
  std::vector<TrainedModel> members_;
  std::vector<double> accuracies_;
  std::size_t active_ = 0;
  std::uint64_t seed_;
  std::size_t updates_ = 0;
};

struct BaselineConfig {
  std::size_t batch_size = 1000;
  std::size_t window_batches = 3;
  std::uint64_t seed = 0;
  EddmConfig eddm;
  std::optional<std::vector<std::size_t>> preset_drifts;
  std::size_t oza_members = 10;
  OzaBase oza_base = OzaBase::hoeffding_tree;
  bool record_timings = true;
};

// Default-hyperparameter boosting, refitted on the window when drift fires.
class GbmBaseline {
 public:
  GbmBaseline(const StreamSchema& schema, const BaselineConfig& config);

  void pretrain(const Dataset& data, const FitObserver& observer = {});
  struct Step {
    std::vector<int> predictions;
    bool drift = false;
    bool refit = false;
  };
  // `window` must already hold the batch. `forced` bypasses the detector.
  Step step(const Batch& batch, const SlidingWindow& window, std::optional<bool> forced = std::nullopt,
            const FitObserver& observer = {});

  std::size_t refit_count() const { return refits_; }
  const TrainedModel& model() const { return model_; }
  const EddmState& detector() const { return detector_; }

 private:
  StreamSchema schema_;
  PipelineConfig config_;
  std::uint64_t seed_;
  TrainedModel model_;
  EddmState detector_;
  std::size_t refits_ = 0;
};

// Same batch loop and run-log schema as run_stream; batch 0 is the pretrain batch.
RunLog run_baseline(BaselineKind kind, const std::vector<BatchPtr>& batches, const StreamSchema& schema,
                    const BaselineConfig& config, const RunHooks& hooks = {}, const std::string& run_id = "");

}  // namespace autostream
