#include "dptm/adapt.hpp"

#include <cmath>
#include <string>

#include "dptm/errors.hpp"
#include "dptm/rng.hpp"

namespace dptm {

void AdaptationConfig::validate(std::size_t side) const {
  if (!(threshold >= 0.0)) throw ConfigError("threshold must be >= 0");
  if (iterations < 0) throw ConfigError("iterations must be >= 0");
  manipulation.validate(side);
  finetune.validate();
}

PartitionResult partition(const SoftmaxClassifier& model, std::span<const Grid> targets,
                          double threshold) {
  if (targets.empty()) throw ValidationError("cannot partition an empty target set");
  if (!(threshold >= 0.0)) throw ConfigError("threshold must be >= 0");
  PartitionResult part;
  part.threshold = threshold;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const Eigen::VectorXd p = predict_probs(model, targets[i]);
    const double h = entropy(p);
    if (h <= threshold) {
      part.trust.push_back({i, argmax_lowest(p), h});
    } else {
      part.non_trust.push_back({i, h});
    }
  }
  return part;
}

std::vector<LabeledSample> build_pseudo_target(const PartitionResult& part,
                                               std::span<const Grid> targets,
                                               std::span<const ManipulatedSample> manipulated,
                                               int classes) {
  std::vector<LabeledSample> out;
  out.reserve(part.trust.size() + manipulated.size());
  auto check = [classes](int label) {
    if (label < 0 || label >= classes) {
      throw ValidationError("pseudo-target label " + std::to_string(label) + " out of range");
    }
  };
  for (const auto& e : part.trust) {
    check(e.pseudo_label);
    if (e.index >= targets.size()) throw IndexError("trust index outside the target set");
    out.push_back({targets[e.index], e.pseudo_label});
  }
  for (const auto& m : manipulated) {
    check(m.assigned_label);
    out.push_back({m.output, m.assigned_label});
  }
  return out;
}

IterationMetrics describe(int r, const PartitionResult& part, int classes,
                          const SoftmaxClassifier& model, const Evaluator& eval) {
  IterationMetrics m;
  m.r = r;
  m.trust_size = part.trust.size();
  m.non_trust_size = part.non_trust.size();
  const auto c = static_cast<std::size_t>(classes);
  m.manipulated_size = (m.non_trust_size / c) * c;
  if (eval) {
    const EvalResult e = eval(model, part);
    m.trust_accuracy = e.trust_accuracy;
    m.target_accuracy = e.target_accuracy;
  }
  return m;
}

RefinementState initial_state(const SoftmaxClassifier& source, std::span<const Grid> targets,
                              double threshold) {
  RefinementState s;
  s.r = 0;
  s.model = source;
  s.partition = partition(source, targets, threshold);
  return s;
}

RefinementState refine_once(const RefinementState& state, std::span<const Grid> targets,
                            const MixtureWorld& world, const NoiseSchedule& schedule,
                            const AdaptationConfig& cfg, const Evaluator& eval,
                            const RoundObserver& observer) {
  if (targets.empty()) throw ValidationError("cannot refine on an empty target set");
  cfg.validate(targets.front().side());
  const int round = state.r + 1;
  const int classes = state.model.classes();

  std::vector<Grid> non_trust;
  non_trust.reserve(state.partition.non_trust.size());
  for (const auto& e : state.partition.non_trust) non_trust.push_back(targets[e.index]);

  const std::vector<ManipulatedSample> manipulated =
      manipulate_set(non_trust, classes, cfg.manipulation, world, schedule,
                     derive_seed(cfg.seed, "iteration", static_cast<std::uint64_t>(round)),
                     cfg.workers);
  const std::vector<LabeledSample> pseudo_target =
      build_pseudo_target(state.partition, targets, manipulated, classes);

  RefinementState next;
  next.r = round;
  next.history = state.history;
  if (pseudo_target.empty()) {
    next.model = state.model;
  } else {
    TrainConfig tc = cfg.finetune;
    tc.seed = derive_seed(cfg.seed, "finetune", static_cast<std::uint64_t>(round));
    next.model = train_ce(state.model, pseudo_target, tc);
  }
  next.partition = partition(next.model, targets, cfg.threshold);
  next.history.push_back(describe(round, next.partition, classes, next.model, eval));
  if (observer) observer(next, manipulated);
  return next;
}

RefinementState run_refinement(const SoftmaxClassifier& source, std::span<const Grid> targets,
                               const MixtureWorld& world, const NoiseSchedule& schedule,
                               const AdaptationConfig& cfg, const Evaluator& eval,
                               const RoundObserver& observer) {
  if (targets.empty()) throw ValidationError("cannot adapt to an empty target set");
  cfg.validate(targets.front().side());
  RefinementState state = initial_state(source, targets, cfg.threshold);
  for (int r = 0; r < cfg.iterations; ++r) {
    state = refine_once(state, targets, world, schedule, cfg, eval, observer);
  }
  return state;
}

std::size_t select_model(std::span<const Eigen::MatrixXd> candidates) {
  if (candidates.empty()) throw ValidationError("no candidate models to select from");
  std::size_t best = 0;
  double best_norm = nuclear_norm(candidates[0]);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double v = nuclear_norm(candidates[i]);
    if (v > best_norm) {
      best = i;
      best_norm = v;
    }
  }
  return best;
}

}  // namespace dptm
