#pragma once

#include <vector>

#include "dptm/oracle.hpp"
#include "dptm/rng.hpp"
#include "dptm/schedule.hpp"

namespace dptm::testing {

inline NoiseSchedule standard_schedule() { return NoiseSchedule::linear(1000, 1e-4, 0.02); }

/// Random world with `classes` x `domains` components on an n x n grid.
inline MixtureWorld random_world(std::size_t n, int classes, int domains, double sigma,
                                 std::uint64_t seed, double mean_scale = 1.0) {
  Rng rng = make_rng(seed, "test-world");
  std::vector<Grid> means;
  std::vector<double> weights;
  std::uniform_real_distribution<double> u(0.5, 1.5);
  double total = 0.0;
  for (int k = 0; k < classes * domains; ++k) {
    means.push_back(mean_scale * gaussian_grid(n, rng));
    weights.push_back(u(rng));
    total += weights.back();
  }
  for (double& w : weights) w /= total;
  return MixtureWorld(classes, domains, std::move(means), std::move(weights), sigma);
}

}  // namespace dptm::testing
