#include "dptm/manipulate.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iostream>
#include <string>
#include <thread>

#include "dptm/errors.hpp"

namespace dptm {

void ManipulationConfig::validate(std::size_t side) const {
  guidance.validate();
  if (std::isnan(rho_init)) throw ConfigError("rho_init is NaN");
  if (std::isnan(rho_mix)) throw ConfigError("rho_mix is NaN");
  if (side < 2 || side % 2 != 0) throw ConfigError("manipulation grid side must be even");
}

std::vector<int> assign_labels(std::size_t count, int classes) {
  if (classes < 1) throw ConfigError("label assignment needs at least one class");
  const auto c = static_cast<std::size_t>(classes);
  const std::size_t kept = (count / c) * c;
  if (kept == 0 && count > 0) {
    std::clog << "warning: " << count << " non-trust samples are fewer than " << classes
              << " classes; all are discarded\n";
  }
  std::vector<int> labels(kept);
  for (std::size_t l = 0; l < kept; ++l) labels[l] = static_cast<int>(l % c);
  return labels;
}

InitResult target_guided_init(const Grid& x_u, double rho_init, int start_step,
                              const NoiseSchedule& schedule, Rng& rng) {
  if (!x_u.all_finite()) throw ValidationError("target sample has non-finite values");
  const FrequencyMask mask(x_u.side(), rho_init);
  const Grid gaussian = gaussian_grid(x_u.side(), rng);
  Grid z0_hat = mix_bands(x_u, gaussian, mask);
  const Grid noise = gaussian_grid(x_u.side(), rng);
  Grid z_start = forward_noise(z0_hat, start_step, noise, schedule);
  return {std::move(z_start), std::move(z0_hat)};
}

ManipulatedSample manipulate_sample(const Grid& x_u, int label, const ManipulationConfig& cfg,
                                    const MixtureWorld& world, const NoiseSchedule& schedule,
                                    Rng& rng) {
  cfg.validate(x_u.side());
  if (x_u.side() != world.side()) throw DimensionError("sample side does not match world side");
  const ClassCondition cond = ClassCondition::of(label);
  world.check_condition(cond);

  const std::vector<int> steps = schedule.step_indices(cfg.guidance.steps);
  InitResult init = target_guided_init(x_u, cfg.rho_init, steps.front(), schedule, rng);
  const FrequencyMask mix_mask(x_u.side(), cfg.rho_mix);
  const double gamma1 = cfg.guidance.denoise_scale;

  ManipulatedSample result;
  result.assigned_label = label;
  result.source_sample = x_u;

  Grid z = std::move(init.z_start);
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const int t = steps[k];
    const int t_prev = k + 1 < steps.size() ? steps[k + 1] : 0;

    // denoise, then invert back to t with the label injected
    const Grid provisional =
        ddim_step(z, t, t_prev, guided_eps(world, z, t, cond, gamma1, schedule), schedule);
    Grid z_tilde = ddim_invert_step(provisional, t, t_prev, cond, cfg.guidance, world, schedule);

    // keep the injected high band, restore the target low band at this noise level
    Grid z0_t = forward_noise(init.z0_hat, t, gaussian_grid(x_u.side(), rng), schedule);
    Grid z_tilde_prime = mix_bands(z0_t, z_tilde, mix_mask);

    Grid next = ddim_step(z_tilde_prime, t, t_prev,
                          guided_eps(world, z_tilde_prime, t, cond, gamma1, schedule), schedule);
    if (!next.all_finite()) {
      throw NumericalError("manipulation diverged at t=" + std::to_string(t));
    }
    if (cfg.record_trace) {
      result.trace.push_back(TraceStep{t, t_prev, z, std::move(z_tilde), std::move(z0_t),
                                       std::move(z_tilde_prime), next});
    }
    z = std::move(next);
  }
  result.output = std::move(z);
  return result;
}

std::vector<ManipulatedSample> manipulate_set(std::span<const Grid> samples, int classes,
                                              const ManipulationConfig& cfg,
                                              const MixtureWorld& world,
                                              const NoiseSchedule& schedule, std::uint64_t seed,
                                              unsigned workers) {
  const std::vector<int> labels = assign_labels(samples.size(), classes);
  std::vector<ManipulatedSample> out(labels.size());
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < labels.size(); i += stride) {
      Rng rng = make_rng(seed, "manipulate-sample", i);
      out[i] = manipulate_sample(samples[i], labels[i], cfg, world, schedule, rng);
    }
  };
  const unsigned n_workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(labels.size())));
  if (n_workers <= 1) {
    work(0, 1);
    return out;
  }
  std::vector<std::exception_ptr> errors(n_workers);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < n_workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          work(w, n_workers);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace dptm
