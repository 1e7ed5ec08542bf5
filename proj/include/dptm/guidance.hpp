#pragma once

#include "dptm/grid.hpp"
#include "dptm/oracle.hpp"
#include "dptm/schedule.hpp"

namespace dptm {

struct GuidanceConfig {
  double denoise_scale = 5.5;    // gamma1, applied when denoising
  double inversion_scale = 0.0;  // gamma2, applied when inverting
  int steps = 20;                // inference steps S

  void validate() const;
};

/// (1 + gamma) * eps_cond - gamma * eps_uncond
Grid cfg_eps(const Grid& eps_cond, const Grid& eps_uncond, double gamma);

/// Classifier-free-guided oracle prediction at (z, t). With gamma == 0 only
/// the conditional branch is evaluated.
Grid guided_eps(const MixtureWorld& world, const Grid& z, int t, const ClassCondition& cond,
                double gamma, const NoiseSchedule& schedule);

/// Deterministic DDIM update from t to t_prev < t:
///   x0_hat = (z_t - sqrt(1 - ab) eps) / sqrt(ab)
///   z_prev = sqrt(ab') x0_hat + sqrt(1 - ab') eps
/// With t_prev == 0 this is x0_hat. Throws OrderingError unless t > t_prev >= 0.
Grid ddim_step(const Grid& z_t, int t, int t_prev, const Grid& eps, const NoiseSchedule& schedule);

/// Algebraic inverse of ddim_step for a given noise field:
///   z_t = sqrt(ab / ab') z_prev + sqrt(ab) (sqrt(1/ab - 1) - sqrt(1/ab' - 1)) eps
Grid ddim_invert_with_eps(const Grid& z_prev, int t, int t_prev, const Grid& eps,
                          const NoiseSchedule& schedule);

/// Timestep at which inversion evaluates the denoiser when stepping up from
/// t_prev. The denoiser is undefined at 0, so the terminal step uses index 1.
int inversion_eval_step(int t_prev);

/// One DDIM inversion step from t_prev up to t, with the gamma2-guided
/// prediction evaluated at (z_prev, t_prev).
Grid ddim_invert_step(const Grid& z_prev, int t, int t_prev, const ClassCondition& cond,
                      const GuidanceConfig& gc, const MixtureWorld& world,
                      const NoiseSchedule& schedule);

}  // namespace dptm
