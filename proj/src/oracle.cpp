#include "dptm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dptm/errors.hpp"

namespace dptm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct NoisedMixture {
  double a;      // signal coefficient sqrt(ab)
  double var;    // per-coordinate marginal variance a^2 s^2 + (1 - ab)
  std::vector<double> log_terms;  // log w_k - |z - a mu_k|^2 / (2 var); -inf when excluded
};

NoisedMixture noised_terms(const MixtureWorld& world, const Grid& z_t, int t,
                           const ClassCondition& cond, const NoiseSchedule& schedule) {
  if (t < 1) throw IndexError("denoiser is undefined at t = 0");
  if (z_t.side() != world.side()) {
    throw DimensionError("latent side " + std::to_string(z_t.side()) + " does not match world side " +
                         std::to_string(world.side()));
  }
  world.check_condition(cond);
  const double ab = schedule.alpha_bar(t);
  const double a = std::sqrt(ab);
  const double s2 = world.sigma_data() * world.sigma_data();
  NoisedMixture nm{a, a * a * s2 + (1.0 - ab), std::vector<double>(world.components(), kNegInf)};
  for (std::size_t k = 0; k < world.components(); ++k) {
    const double w = world.component_weight(k);
    if (w <= 0.0) continue;
    if (cond.conditional() && world.component_class(k) != cond.cls()) continue;
    const Grid& mu = world.component_mean(k);
    double d2 = 0.0;
    for (std::size_t i = 0; i < z_t.size(); ++i) {
      const double d = z_t[i] - a * mu[i];
      d2 += d * d;
    }
    nm.log_terms[k] = std::log(w) - 0.5 * d2 / nm.var;
  }
  return nm;
}

// Normalizes log terms into probabilities; returns log-sum-exp.
double normalize(std::vector<double>& log_terms) {
  const double top = *std::max_element(log_terms.begin(), log_terms.end());
  if (top == kNegInf) throw ValidationError("condition selects no component with positive weight");
  double sum = 0.0;
  for (double& v : log_terms) {
    v = v == kNegInf ? 0.0 : std::exp(v - top);
    sum += v;
  }
  for (double& v : log_terms) v /= sum;
  return top + std::log(sum);
}

}  // namespace

MixtureWorld::MixtureWorld(int classes, int domains, std::vector<Grid> means,
                           std::vector<double> weights, double sigma_data)
    : classes_(classes),
      domains_(domains),
      means_(std::move(means)),
      weights_(std::move(weights)),
      sigma_data_(sigma_data) {
  if (classes < 1 || domains < 1) throw ConfigError("world needs at least one class and domain");
  const auto k = static_cast<std::size_t>(classes) * static_cast<std::size_t>(domains);
  if (means_.size() != k || weights_.size() != k) {
    throw DimensionError("world expects " + std::to_string(k) + " components");
  }
  for (const Grid& m : means_) {
    require_same_side(m, means_.front(), "world means");
    if (!m.all_finite()) throw ValidationError("world mean has non-finite values");
  }
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw ValidationError("world weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ValidationError("world weights must sum to 1, got " + std::to_string(total));
  }
  if (!(sigma_data >= 0.0) || !std::isfinite(sigma_data)) {
    throw ValidationError("sigma_data must be finite and >= 0");
  }
}

void MixtureWorld::check_indices(int cls, int domain) const {
  if (cls < 0 || cls >= classes_ || domain < 0 || domain >= domains_) {
    throw IndexError("component (" + std::to_string(cls) + ", " + std::to_string(domain) +
                     ") outside " + std::to_string(classes_) + " x " + std::to_string(domains_));
  }
}

void MixtureWorld::check_condition(const ClassCondition& cond) const {
  if (cond.conditional() && (cond.cls() < 0 || cond.cls() >= classes_)) {
    throw IndexError("class condition " + std::to_string(cond.cls()) + " out of range");
  }
}

const Grid& MixtureWorld::mean(int cls, int domain) const {
  check_indices(cls, domain);
  return means_[static_cast<std::size_t>(cls * domains_ + domain)];
}

double MixtureWorld::weight(int cls, int domain) const {
  check_indices(cls, domain);
  return weights_[static_cast<std::size_t>(cls * domains_ + domain)];
}

Grid sample_data(const MixtureWorld& world, int cls, int domain, Rng& rng) {
  const Grid& mu = world.mean(cls, domain);
  Grid x = mu;
  std::normal_distribution<double> dist(0.0, 1.0);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += world.sigma_data() * dist(rng);
  return x;
}

std::vector<double> responsibilities(const MixtureWorld& world, const Grid& z_t, int t,
                                     const ClassCondition& cond, const NoiseSchedule& schedule) {
  NoisedMixture nm = noised_terms(world, z_t, t, cond, schedule);
  normalize(nm.log_terms);
  return nm.log_terms;
}

Grid posterior_x0(const MixtureWorld& world, const Grid& z_t, int t, const ClassCondition& cond,
                  const NoiseSchedule& schedule) {
  NoisedMixture nm = noised_terms(world, z_t, t, cond, schedule);
  normalize(nm.log_terms);
  const double s2 = world.sigma_data() * world.sigma_data();
  const double gain = nm.a * s2 / nm.var;
  // sum_k r_k (mu_k + gain (z - a mu_k)) = gain z + (1 - gain a) sum_k r_k mu_k
  Grid out(z_t.side());
  for (std::size_t k = 0; k < world.components(); ++k) {
    const double r = nm.log_terms[k];
    if (r == 0.0) continue;
    const Grid& mu = world.component_mean(k);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += r * mu[i];
  }
  const double shrink = 1.0 - gain * nm.a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = gain * z_t[i] + shrink * out[i];
  return out;
}

Grid eps_theta(const MixtureWorld& world, const Grid& z_t, int t, const ClassCondition& cond,
               const NoiseSchedule& schedule) {
  const Grid x0 = posterior_x0(world, z_t, t, cond, schedule);
  const double ab = schedule.alpha_bar(t);
  const double a = std::sqrt(ab);
  const double sn = std::sqrt(1.0 - ab);
  Grid eps(z_t.side());
  for (std::size_t i = 0; i < eps.size(); ++i) eps[i] = (z_t[i] - a * x0[i]) / sn;
  return eps;
}

double log_marginal(const MixtureWorld& world, const Grid& z_t, int t, const ClassCondition& cond,
                    const NoiseSchedule& schedule) {
  NoisedMixture nm = noised_terms(world, z_t, t, cond, schedule);
  double cond_mass = 0.0;
  for (std::size_t k = 0; k < world.components(); ++k)
    if (nm.log_terms[k] != kNegInf) cond_mass += world.component_weight(k);
  const double lse = normalize(nm.log_terms);
  const double dim = static_cast<double>(z_t.size());
  return lse - std::log(cond_mass) - 0.5 * dim * std::log(2.0 * std::numbers::pi * nm.var);
}

std::vector<double> bayes_class_posterior(const MixtureWorld& world, const Grid& x) {
  if (!(world.sigma_data() > 0.0)) throw ValidationError("Bayes posterior needs sigma_data > 0");
  if (x.side() != world.side()) throw DimensionError("bayes_class_posterior: side mismatch");
  const double s2 = world.sigma_data() * world.sigma_data();
  std::vector<double> logs(world.components(), kNegInf);
  for (std::size_t k = 0; k < world.components(); ++k) {
    const double w = world.component_weight(k);
    if (w <= 0.0) continue;
    double d2 = 0.0;
    const Grid& mu = world.component_mean(k);
    for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - mu[i]) * (x[i] - mu[i]);
    logs[k] = std::log(w) - 0.5 * d2 / s2;
  }
  normalize(logs);
  std::vector<double> post(static_cast<std::size_t>(world.classes()), 0.0);
  for (std::size_t k = 0; k < world.components(); ++k)
    post[static_cast<std::size_t>(world.component_class(k))] += logs[k];
  return post;
}

}  // namespace dptm
