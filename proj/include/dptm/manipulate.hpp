#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dptm/freq.hpp"
#include "dptm/grid.hpp"
#include "dptm/guidance.hpp"
#include "dptm/oracle.hpp"
#include "dptm/rng.hpp"
#include "dptm/schedule.hpp"

namespace dptm {

/// Cutoffs are radii in frequency bins. A negative radius means an empty low
/// band (H = 0); any radius >= FrequencyMask::max_radius(n) passes every bin.
struct ManipulationConfig {
  GuidanceConfig guidance;
  double rho_init = 2.0;  // mask used to build the starting pseudo-image
  double rho_mix = 2.0;   // mask used for per-step domain feature preservation
  bool record_trace = false;

  void validate(std::size_t side) const;
};

/// Intermediate latents of one zigzag step, all at the same timestep t except
/// `next`, which lives at t_prev.
struct TraceStep {
  int t = 0;
  int t_prev = 0;
  Grid z_t;             // latent entering the step
  Grid z_tilde;         // after denoise + inversion (semantics injected)
  Grid z0_t;            // clean pseudo-image re-noised to t
  Grid z_tilde_prime;   // low band of z0_t merged with high band of z_tilde
  Grid next;            // re-denoised latent at t_prev
};

struct ManipulatedSample {
  Grid output;
  int assigned_label = 0;
  Grid source_sample;
  std::vector<TraceStep> trace;
};

/// Class-balanced label assignment for `count` non-trust samples: the first
/// floor(count / classes) * classes samples get labels (l mod classes) in
/// order; the residual samples are dropped. Throws ConfigError when classes < 1.
std::vector<int> assign_labels(std::size_t count, int classes);

struct InitResult {
  Grid z_start;  // z_T, the sampling starting point
  Grid z0_hat;   // target-domain pseudo-image (encoder is identity)
};

/// Keeps the low band of x_u, replaces the high band with that of a fresh
/// Gaussian grid, and noises the result to `start_step`.
InitResult target_guided_init(const Grid& x_u, double rho_init, int start_step,
                              const NoiseSchedule& schedule, Rng& rng);

ManipulatedSample manipulate_sample(const Grid& x_u, int label, const ManipulationConfig& cfg,
                                    const MixtureWorld& world, const NoiseSchedule& schedule,
                                    Rng& rng);

/// Assigns labels, then manipulates each kept sample with its own RNG stream
/// derived from (seed, sample index). Output order follows input order
/// regardless of `workers`.
std::vector<ManipulatedSample> manipulate_set(std::span<const Grid> samples, int classes,
                                              const ManipulationConfig& cfg,
                                              const MixtureWorld& world,
                                              const NoiseSchedule& schedule, std::uint64_t seed,
                                              unsigned workers = 1);

}  // namespace dptm
