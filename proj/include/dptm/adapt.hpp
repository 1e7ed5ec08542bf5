#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dptm/classifier.hpp"
#include "dptm/grid.hpp"
#include "dptm/manipulate.hpp"
#include "dptm/oracle.hpp"
#include "dptm/schedule.hpp"

namespace dptm {

struct TrustEntry {
  std::size_t index = 0;  // position in the target list
  int pseudo_label = 0;
  double entropy = 0.0;
};

struct NonTrustEntry {
  std::size_t index = 0;
  double entropy = 0.0;
};

/// Entropy split of the target set. Both lists keep dataset order; every
/// target index appears in exactly one of them.
struct PartitionResult {
  std::vector<TrustEntry> trust;
  std::vector<NonTrustEntry> non_trust;
  double threshold = 0.0;
};

/// Metrics of the model after r refinement rounds (r = 0 is the source
/// model): the trust/non-trust split it induces, the size of the manipulated
/// set that split yields, and evaluation-only accuracies.
struct IterationMetrics {
  int r = 0;
  std::size_t trust_size = 0;
  double trust_accuracy = 0.0;
  std::size_t non_trust_size = 0;
  std::size_t manipulated_size = 0;
  double target_accuracy = 0.0;
};

/// Evaluation-only accuracies. Supplied by the caller, who is the only party
/// holding ground-truth target labels.
struct EvalResult {
  double trust_accuracy = 0.0;
  double target_accuracy = 0.0;
};
using Evaluator = std::function<EvalResult(const SoftmaxClassifier&, const PartitionResult&)>;

struct AdaptationConfig {
  double threshold = 0.01;  // entropy threshold E, in nats
  int iterations = 10;      // R
  ManipulationConfig manipulation;
  TrainConfig finetune;
  std::uint64_t seed = 0;
  unsigned workers = 1;

  void validate(std::size_t side) const;
};

struct RefinementState {
  int r = 0;
  SoftmaxClassifier model;
  std::vector<IterationMetrics> history;  // metrics for rounds 1..r
  PartitionResult partition;              // split induced by `model`
};

/// Called after each round with the new state and the manipulated set that
/// produced it (for artifact emission).
using RoundObserver =
    std::function<void(const RefinementState&, std::span<const ManipulatedSample>)>;

/// Throws ValidationError on an empty target set, ConfigError when E < 0.
PartitionResult partition(const SoftmaxClassifier& model, std::span<const Grid> targets,
                          double threshold);

/// Trust samples with their pseudo-labels followed by manipulated samples
/// with their assigned labels.
std::vector<LabeledSample> build_pseudo_target(const PartitionResult& part,
                                               std::span<const Grid> targets,
                                               std::span<const ManipulatedSample> manipulated,
                                               int classes);

/// Metrics for a model/partition pair at round r.
IterationMetrics describe(int r, const PartitionResult& part, int classes,
                          const SoftmaxClassifier& model, const Evaluator& eval);

/// Initial state: the source model and the split it induces.
RefinementState initial_state(const SoftmaxClassifier& source, std::span<const Grid> targets,
                              double threshold);

/// One round: manipulate the current non-trust set, build the pseudo-target
/// domain, fine-tune from the current parameters, re-partition.
RefinementState refine_once(const RefinementState& state, std::span<const Grid> targets,
                            const MixtureWorld& world, const NoiseSchedule& schedule,
                            const AdaptationConfig& cfg, const Evaluator& eval,
                            const RoundObserver& observer = {});

/// Runs `cfg.iterations` rounds starting from the source model.
RefinementState run_refinement(const SoftmaxClassifier& source, std::span<const Grid> targets,
                               const MixtureWorld& world, const NoiseSchedule& schedule,
                               const AdaptationConfig& cfg, const Evaluator& eval,
                               const RoundObserver& observer = {});

/// Index of the candidate probability matrix with the largest nuclear norm;
/// ties resolve to the lowest index.
std::size_t select_model(std::span<const Eigen::MatrixXd> candidates);

}  // namespace dptm
