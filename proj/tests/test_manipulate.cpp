#include <gtest/gtest.h>

#include <iostream>
#include <map>

#include "dptm/errors.hpp"
#include "dptm/manipulate.hpp"
#include "dptm/synthdata.hpp"
#include "support.hpp"

using namespace dptm;
using dptm::testing::random_world;
using dptm::testing::standard_schedule;

TEST(AssignLabels, SmallCases) {
  EXPECT_EQ(assign_labels(7, 3), (std::vector<int>{0, 1, 2, 0, 1, 2}));
  EXPECT_TRUE(assign_labels(2, 3).empty());
  EXPECT_TRUE(assign_labels(0, 3).empty());
  EXPECT_EQ(assign_labels(5, 1), std::vector<int>(5, 0));
  EXPECT_THROW(assign_labels(5, 0), ConfigError);
}

TEST(AssignLabels, BalancedOverGrid) {
  std::streambuf* saved = std::clog.rdbuf(nullptr);  // discard warnings are expected
  for (std::size_t u = 0; u <= 300; u += 7)
    for (int c = 1; c <= 20; ++c) {
      const auto labels = assign_labels(u, c);
      ASSERT_EQ(labels.size(), (u / c) * c);
      std::map<int, std::size_t> counts;
      for (int l : labels) counts[l]++;
      if (labels.empty()) continue;
      ASSERT_EQ(counts.size(), static_cast<std::size_t>(c));
      for (const auto& [label, n] : counts) ASSERT_EQ(n, u / c) << label;
    }
  std::clog.rdbuf(saved);
}

TEST(Manipulate, ConfigValidation) {
  ManipulationConfig cfg;
  EXPECT_NO_THROW(cfg.validate(16));
  EXPECT_THROW(cfg.validate(15), ConfigError);
  cfg.rho_mix = std::nan("");
  EXPECT_THROW(cfg.validate(16), ConfigError);
}

TEST(Manipulate, InitMaskExtremes) {
  const auto s = standard_schedule();
  Rng rng = make_rng(1, "x");
  const Grid x = gaussian_grid(8, rng);

  Rng a = make_rng(2, "init");
  const auto keep = target_guided_init(x, 1e9, 1000, s, a);
  EXPECT_LT(max_abs_diff(keep.z0_hat, x), 1e-12);

  Rng b = make_rng(2, "init");
  const auto drop = target_guided_init(x, -1.0, 1000, s, b);
  Rng c = make_rng(2, "init");
  const Grid gaussian = gaussian_grid(8, c);
  EXPECT_LT(max_abs_diff(drop.z0_hat, gaussian), 1e-12);
  const Grid noise = gaussian_grid(8, c);
  EXPECT_LT(max_abs_diff(drop.z_start, forward_noise(drop.z0_hat, 1000, noise, s)), 1e-12);
}

TEST(Manipulate, InitKeepsLowBand) {
  const auto s = standard_schedule();
  Rng rng = make_rng(3, "x");
  const Grid x = gaussian_grid(16, rng);
  const auto init = target_guided_init(x, 2.0, 1000, s, rng);
  const FrequencyMask m(16, 2.0);
  EXPECT_LT(max_abs_diff(low_band(init.z0_hat, m), low_band(x, m)), 1e-12);
  EXPECT_GT(norm(high_band(init.z0_hat, m) - high_band(x, m)), 1.0);
}

TEST(Manipulate, TraceStructure) {
  const auto s = standard_schedule();
  const MixtureWorld w = random_world(8, 3, 2, 0.3, 4);
  Rng rng = make_rng(5, "x");
  const Grid x = sample_data(w, 0, 1, rng);
  ManipulationConfig cfg;
  cfg.record_trace = true;
  cfg.guidance.steps = 10;
  Rng r = make_rng(6, "m");
  const auto out = manipulate_sample(x, 2, cfg, w, s, r);
  ASSERT_EQ(out.trace.size(), 10u);
  EXPECT_EQ(out.assigned_label, 2);
  EXPECT_EQ(out.source_sample, x);
  EXPECT_EQ(out.trace.front().t, 1000);
  EXPECT_EQ(out.trace.back().t_prev, 0);
  for (std::size_t k = 1; k < out.trace.size(); ++k) {
    EXPECT_EQ(out.trace[k].t, out.trace[k - 1].t_prev);
    EXPECT_EQ(out.trace[k].z_t, out.trace[k - 1].next);
  }
  EXPECT_EQ(out.trace.back().next, out.output);
  // the merged latent carries z0_t's low band and z_tilde's high band
  const FrequencyMask m(8, cfg.rho_mix);
  const auto& st = out.trace[3];
  EXPECT_LT(max_abs_diff(st.z_tilde_prime, low_band(st.z0_t, m) + high_band(st.z_tilde, m)), 1e-12);
}

TEST(Manipulate, RejectsBadInputs) {
  const auto s = standard_schedule();
  const MixtureWorld w = random_world(8, 3, 1, 0.3, 7);
  Rng rng = make_rng(8, "m");
  ManipulationConfig cfg;
  EXPECT_THROW(manipulate_sample(Grid(8), 3, cfg, w, s, rng), IndexError);
  EXPECT_THROW(manipulate_sample(Grid(4), 0, cfg, w, s, rng), DimensionError);
  Grid bad(8);
  bad[0] = NAN;
  EXPECT_THROW(manipulate_sample(bad, 0, cfg, w, s, rng), ValidationError);
}

TEST(Manipulate, SetIsDeterministicAndWorkerIndependent) {
  const auto s = standard_schedule();
  const MixtureWorld w = random_world(8, 3, 2, 0.3, 9);
  Rng rng = make_rng(10, "x");
  std::vector<Grid> xs;
  for (int i = 0; i < 11; ++i) xs.push_back(sample_data(w, i % 3, 1, rng));
  ManipulationConfig cfg;
  cfg.guidance.steps = 5;
  const auto a = manipulate_set(xs, 3, cfg, w, s, 42, 1);
  const auto b = manipulate_set(xs, 3, cfg, w, s, 42, 3);
  ASSERT_EQ(a.size(), 9u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].output, b[i].output);
    EXPECT_EQ(a[i].assigned_label, static_cast<int>(i % 3));
    EXPECT_EQ(a[i].source_sample, xs[i]);
  }
  const auto c = manipulate_set(xs, 3, cfg, w, s, 43, 1);
  EXPECT_NE(a[0].output, c[0].output);
}

// With guidance on and the low band empty, outputs follow the assigned class.
TEST(Manipulate, EmptyMaskFollowsAssignedClass) {
  BenchmarkSpec spec = default_benchmark();
  spec.samples_per_class = 5;
  const Benchmark b = build_world(spec);
  const auto s = standard_schedule();
  ManipulationConfig cfg;
  cfg.rho_init = -1.0;
  cfg.rho_mix = -1.0;
  std::vector<Grid> xs;
  for (const auto& ls : b.target) xs.push_back(ls.x);
  const auto out = manipulate_set(xs, 4, cfg, b.world, s, 7);
  for (const auto& m : out) {
    const auto post = bayes_class_posterior(b.world, m.output);
    EXPECT_GT(post[static_cast<std::size_t>(m.assigned_label)], 0.9);
  }
}
