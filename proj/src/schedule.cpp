#include "dptm/schedule.hpp"

#include <cmath>
#include <string>

#include "dptm/errors.hpp"

namespace dptm {

NoiseSchedule NoiseSchedule::linear(int train_steps, double beta_start, double beta_end) {
  if (train_steps < 1) {
    throw ConfigError("schedule.train_steps must be >= 1, got " + std::to_string(train_steps));
  }
  if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0)) {
    throw ConfigError("schedule betas must satisfy 0 < beta_start <= beta_end < 1");
  }
  std::vector<double> alpha_bar(static_cast<std::size_t>(train_steps) + 1);
  alpha_bar[0] = 1.0;
  double prod = 1.0;
  for (int t = 1; t <= train_steps; ++t) {
    const double frac = train_steps == 1 ? 0.0 : static_cast<double>(t - 1) / (train_steps - 1);
    const double beta = beta_start + frac * (beta_end - beta_start);
    prod *= 1.0 - beta;
    alpha_bar[static_cast<std::size_t>(t)] = prod;
  }
  if (!(alpha_bar.back() < 1e-3)) {
    throw ConfigError("schedule does not reach the noise floor: alpha_bar[T] = " +
                      std::to_string(alpha_bar.back()) + " (needs < 1e-3)");
  }
  return NoiseSchedule(std::move(alpha_bar));
}

void NoiseSchedule::check_index(int t) const {
  if (t < 0 || t > train_steps()) {
    throw IndexError("timestep " + std::to_string(t) + " outside [0, " +
                     std::to_string(train_steps()) + "]");
  }
}

double NoiseSchedule::alpha_bar(int t) const {
  check_index(t);
  return alpha_bar_[static_cast<std::size_t>(t)];
}

double NoiseSchedule::signal(int t) const { return std::sqrt(alpha_bar(t)); }

double NoiseSchedule::noise(int t) const { return std::sqrt(1.0 - alpha_bar(t)); }

std::vector<int> NoiseSchedule::step_indices(int steps) const {
  const int total = train_steps();
  if (steps < 1 || steps > total) {
    throw ConfigError("inference steps must lie in [1, " + std::to_string(total) + "], got " +
                      std::to_string(steps));
  }
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) {
    const long long num = static_cast<long long>(steps - k) * total;
    out.push_back(static_cast<int>(num / steps));
  }
  return out;
}

Grid forward_noise(const Grid& x0, int t, const Grid& noise, const NoiseSchedule& schedule) {
  require_same_side(x0, noise, "forward_noise");
  const double ab = schedule.alpha_bar(t);
  return axpby(std::sqrt(ab), x0, std::sqrt(1.0 - ab), noise);
}

}  // namespace dptm
