#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "dptm/grid.hpp"
#include "dptm/rng.hpp"
#include "dptm/schedule.hpp"

namespace dptm {

/// Either a class index or the null condition used for unconditional
/// prediction.
class ClassCondition {
 public:
  static ClassCondition unconditional() { return ClassCondition(); }
  static ClassCondition of(int cls) { return ClassCondition(cls); }

  bool conditional() const { return cls_.has_value(); }
  int cls() const { return *cls_; }

 private:
  ClassCondition() = default;
  explicit ClassCondition(int cls) : cls_(cls) {}
  std::optional<int> cls_;
};

/// Isotropic Gaussian mixture indexed by (class, domain). It defines the data
/// distribution of the synthetic world and, through conjugacy under the
/// forward process, the exact minimum-MSE denoiser that stands in for a
/// pretrained diffusion network.
///
/// Component (c, d) has mean mu_{c,d}, weight w_{c,d} and covariance
/// sigma_data^2 * I. Conditioning on class c restricts to the sub-mixture
/// over d with renormalized weights.
class MixtureWorld {
 public:
  /// `means` and `weights` are ordered component = c * domains + d.
  /// Weights must be nonnegative and sum to 1 within 1e-12.
  MixtureWorld(int classes, int domains, std::vector<Grid> means, std::vector<double> weights,
               double sigma_data);

  std::size_t side() const { return means_.front().side(); }
  int classes() const { return classes_; }
  int domains() const { return domains_; }
  std::size_t components() const { return means_.size(); }
  double sigma_data() const { return sigma_data_; }

  const Grid& mean(int cls, int domain) const;
  double weight(int cls, int domain) const;
  const Grid& component_mean(std::size_t k) const { return means_[k]; }
  double component_weight(std::size_t k) const { return weights_[k]; }
  int component_class(std::size_t k) const { return static_cast<int>(k) / domains_; }

  void check_condition(const ClassCondition& cond) const;

 private:
  void check_indices(int cls, int domain) const;

  int classes_;
  int domains_;
  std::vector<Grid> means_;
  std::vector<double> weights_;
  double sigma_data_;
};

/// mu_{c,d} + sigma_data * g with g ~ N(0, I).
Grid sample_data(const MixtureWorld& world, int cls, int domain, Rng& rng);

/// Posterior responsibilities of each component given z_t (zero for
/// components excluded by the condition). Computed with log-sum-exp.
std::vector<double> responsibilities(const MixtureWorld& world, const Grid& z_t, int t,
                                     const ClassCondition& cond, const NoiseSchedule& schedule);

/// E[x0 | z_t, cond]. Requires t >= 1.
Grid posterior_x0(const MixtureWorld& world, const Grid& z_t, int t, const ClassCondition& cond,
                  const NoiseSchedule& schedule);

/// Noise prediction consistent with posterior_x0:
/// (z_t - sqrt(ab) * E[x0 | z_t]) / sqrt(1 - ab).
Grid eps_theta(const MixtureWorld& world, const Grid& z_t, int t, const ClassCondition& cond,
               const NoiseSchedule& schedule);

/// log q_t(z_t | cond), the closed-form marginal density of the noised mixture.
double log_marginal(const MixtureWorld& world, const Grid& z_t, int t, const ClassCondition& cond,
                    const NoiseSchedule& schedule);

/// Bayes posterior over classes for a clean sample, p(c | x) under the world.
std::vector<double> bayes_class_posterior(const MixtureWorld& world, const Grid& x);

}  // namespace dptm
