#pragma once

#include <span>
#include <vector>

#include "dptm/grid.hpp"

namespace dptm {

/// Discretized diffusion schedule. Holds the cumulative signal-power
/// coefficients alpha_bar[0..T] with alpha_bar[0] = 1, strictly decreasing,
/// and alpha_bar[T] < 1e-3. Every noising and denoising formula in the
/// library is written in terms of this single cumulative array.
///
/// Immutable after construction.
class NoiseSchedule {
 public:
  /// Linear-beta DDPM discretization: beta_t evenly spaced over
  /// [beta_start, beta_end] for t = 1..T, alpha_bar[t] = prod_{s<=t} (1 - beta_s).
  /// Throws ConfigError on invalid ranges or when alpha_bar[T] >= 1e-3.
  static NoiseSchedule linear(int train_steps, double beta_start, double beta_end);

  int train_steps() const { return static_cast<int>(alpha_bar_.size()) - 1; }

  /// Throws IndexError unless 0 <= t <= train_steps().
  double alpha_bar(int t) const;
  /// sqrt(alpha_bar[t])
  double signal(int t) const;
  /// sqrt(1 - alpha_bar[t])
  double noise(int t) const;

  std::span<const double> alpha_bars() const { return alpha_bar_; }

  /// Inference subsequence for a sampler with `steps` steps: uniform stride,
  /// t_k = floor((steps - k) * T / steps) for k = 0..steps-1. Strictly
  /// decreasing, starts at T and ends at floor(T / steps) >= 1.
  std::vector<int> step_indices(int steps) const;

 private:
  explicit NoiseSchedule(std::vector<double> alpha_bar) : alpha_bar_(std::move(alpha_bar)) {}

  void check_index(int t) const;

  std::vector<double> alpha_bar_;
};

inline NoiseSchedule make_linear_schedule(int train_steps, double beta_start, double beta_end) {
  return NoiseSchedule::linear(train_steps, beta_start, beta_end);
}

/// sqrt(alpha_bar[t]) * x0 + sqrt(1 - alpha_bar[t]) * noise
Grid forward_noise(const Grid& x0, int t, const Grid& noise, const NoiseSchedule& schedule);

}  // namespace dptm
