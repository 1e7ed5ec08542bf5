#include "dptm/guidance.hpp"

#include <cmath>
#include <string>

#include "dptm/errors.hpp"

namespace dptm {

namespace {

void check_order(int t, int t_prev, const char* where) {
  if (!(t > t_prev && t_prev >= 0)) {
    throw OrderingError(std::string(where) + ": need t > t_prev >= 0, got t=" + std::to_string(t) +
                        " t_prev=" + std::to_string(t_prev));
  }
}

}  // namespace

void GuidanceConfig::validate() const {
  if (steps < 1) throw ConfigError("guidance.steps must be >= 1");
  if (!std::isfinite(denoise_scale)) throw ConfigError("guidance.denoise_scale must be finite");
  if (!std::isfinite(inversion_scale)) throw ConfigError("guidance.inversion_scale must be finite");
}

Grid cfg_eps(const Grid& eps_cond, const Grid& eps_uncond, double gamma) {
  return axpby(1.0 + gamma, eps_cond, -gamma, eps_uncond);
}

Grid guided_eps(const MixtureWorld& world, const Grid& z, int t, const ClassCondition& cond,
                double gamma, const NoiseSchedule& schedule) {
  Grid cond_eps = eps_theta(world, z, t, cond, schedule);
  if (gamma == 0.0 || !cond.conditional()) return cond_eps;
  return cfg_eps(cond_eps, eps_theta(world, z, t, ClassCondition::unconditional(), schedule), gamma);
}

Grid ddim_step(const Grid& z_t, int t, int t_prev, const Grid& eps, const NoiseSchedule& schedule) {
  check_order(t, t_prev, "ddim_step");
  require_same_side(z_t, eps, "ddim_step");
  const double ab = schedule.alpha_bar(t);
  const double ab_prev = schedule.alpha_bar(t_prev);
  const double sa = std::sqrt(ab);
  const double sn = std::sqrt(1.0 - ab);
  const double sa_prev = std::sqrt(ab_prev);
  const double sn_prev = std::sqrt(1.0 - ab_prev);
  Grid out(z_t.side());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x0 = (z_t[i] - sn * eps[i]) / sa;
    out[i] = sa_prev * x0 + sn_prev * eps[i];
  }
  return out;
}

Grid ddim_invert_with_eps(const Grid& z_prev, int t, int t_prev, const Grid& eps,
                          const NoiseSchedule& schedule) {
  check_order(t, t_prev, "ddim_invert_step");
  require_same_side(z_prev, eps, "ddim_invert_step");
  const double ab = schedule.alpha_bar(t);
  const double ab_prev = schedule.alpha_bar(t_prev);
  const double ratio = std::sqrt(ab / ab_prev);
  const double coef = std::sqrt(ab) * (std::sqrt(1.0 / ab - 1.0) - std::sqrt(1.0 / ab_prev - 1.0));
  return axpby(ratio, z_prev, coef, eps);
}

int inversion_eval_step(int t_prev) { return t_prev < 1 ? 1 : t_prev; }

Grid ddim_invert_step(const Grid& z_prev, int t, int t_prev, const ClassCondition& cond,
                      const GuidanceConfig& gc, const MixtureWorld& world,
                      const NoiseSchedule& schedule) {
  check_order(t, t_prev, "ddim_invert_step");
  const Grid eps =
      guided_eps(world, z_prev, inversion_eval_step(t_prev), cond, gc.inversion_scale, schedule);
  return ddim_invert_with_eps(z_prev, t, t_prev, eps, schedule);
}

}  // namespace dptm
