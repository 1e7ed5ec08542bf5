#include <gtest/gtest.h>

#include <cmath>

#include "dptm/errors.hpp"
#include "dptm/guidance.hpp"
#include "support.hpp"

using namespace dptm;
using dptm::testing::random_world;
using dptm::testing::standard_schedule;

TEST(Guidance, DefaultsAndValidation) {
  GuidanceConfig g;
  EXPECT_EQ(g.denoise_scale, 5.5);
  EXPECT_EQ(g.inversion_scale, 0.0);
  EXPECT_EQ(g.steps, 20);
  g.steps = 0;
  EXPECT_THROW(g.validate(), ConfigError);
  g.steps = 1;
  g.denoise_scale = INFINITY;
  EXPECT_THROW(g.validate(), ConfigError);
}

TEST(Guidance, CfgCombination) {
  Rng rng = make_rng(1, "cfg");
  const Grid c = gaussian_grid(4, rng);
  const Grid u = gaussian_grid(4, rng);
  EXPECT_EQ(cfg_eps(c, u, 0.0), c);
  const Grid g = cfg_eps(c, u, 5.5);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(g[i], 6.5 * c[i] - 5.5 * u[i], 1e-14);
  EXPECT_LT(max_abs_diff(cfg_eps(c, c, 3.0), c), 1e-14);
}

TEST(Guidance, GuidedEpsBranches) {
  const auto s = standard_schedule();
  const MixtureWorld w = random_world(4, 3, 1, 0.3, 2);
  Rng rng = make_rng(3, "z");
  const Grid z = gaussian_grid(4, rng);
  const auto cond = ClassCondition::of(1);
  EXPECT_EQ(guided_eps(w, z, 200, cond, 0.0, s), eps_theta(w, z, 200, cond, s));
  EXPECT_EQ(guided_eps(w, z, 200, ClassCondition::unconditional(), 4.0, s),
            eps_theta(w, z, 200, ClassCondition::unconditional(), s));
  const Grid expected = cfg_eps(eps_theta(w, z, 200, cond, s),
                                eps_theta(w, z, 200, ClassCondition::unconditional(), s), 2.0);
  EXPECT_EQ(guided_eps(w, z, 200, cond, 2.0, s), expected);
}

TEST(Guidance, StepThenInvertIsIdentity) {
  const auto s = standard_schedule();
  Rng rng = make_rng(4, "ddim");
  const auto steps = s.step_indices(20);
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const int t = steps[k];
    const int tp = k + 1 < steps.size() ? steps[k + 1] : 0;
    const Grid z = gaussian_grid(8, rng);
    const Grid eps = gaussian_grid(8, rng);
    const Grid back = ddim_invert_with_eps(ddim_step(z, t, tp, eps, s), t, tp, eps, s);
    EXPECT_LT(norm(back - z) / norm(z), 1e-10) << "t=" << t;
  }
}

TEST(Guidance, DdimStepFormula) {
  const auto s = standard_schedule();
  Rng rng = make_rng(5, "ddim");
  const Grid z = gaussian_grid(4, rng);
  const Grid eps = gaussian_grid(4, rng);
  const Grid out = ddim_step(z, 600, 300, eps, s);
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double x0 = (z[i] - s.noise(600) * eps[i]) / s.signal(600);
    EXPECT_NEAR(out[i], s.signal(300) * x0 + s.noise(300) * eps[i], 1e-12);
  }
  // terminal step returns the x0 estimate
  const Grid x0 = ddim_step(z, 50, 0, eps, s);
  for (std::size_t i = 0; i < z.size(); ++i)
    EXPECT_NEAR(x0[i], (z[i] - s.noise(50) * eps[i]) / s.signal(50), 1e-12);
}

TEST(Guidance, OrderingErrors) {
  const auto s = standard_schedule();
  const Grid z(4);
  EXPECT_THROW(ddim_step(z, 100, 100, z, s), OrderingError);
  EXPECT_THROW(ddim_step(z, 100, 200, z, s), OrderingError);
  EXPECT_THROW(ddim_step(z, 100, -1, z, s), OrderingError);
  EXPECT_THROW(ddim_invert_with_eps(z, 10, 20, z, s), OrderingError);
  EXPECT_THROW(ddim_step(z, 100, 50, Grid(2), s), DimensionError);
}

TEST(Guidance, InversionEvaluationStep) {
  EXPECT_EQ(inversion_eval_step(0), 1);
  EXPECT_EQ(inversion_eval_step(1), 1);
  EXPECT_EQ(inversion_eval_step(950), 950);
}

TEST(Guidance, InvertStepUsesPredictionAtPreviousStep) {
  const auto s = standard_schedule();
  const MixtureWorld w = random_world(4, 2, 1, 0.3, 6);
  Rng rng = make_rng(7, "z");
  const Grid z = gaussian_grid(4, rng);
  GuidanceConfig gc;
  gc.inversion_scale = 1.5;
  const auto cond = ClassCondition::of(0);
  const Grid got = ddim_invert_step(z, 500, 450, cond, gc, w, s);
  const Grid want = ddim_invert_with_eps(z, 500, 450, guided_eps(w, z, 450, cond, 1.5, s), s);
  EXPECT_EQ(got, want);
  const Grid got0 = ddim_invert_step(z, 50, 0, cond, gc, w, s);
  EXPECT_EQ(got0, ddim_invert_with_eps(z, 50, 0, guided_eps(w, z, 1, cond, 1.5, s), s));
}

// Under a constant noise field, a full DDIM trajectory is invertible exactly.
TEST(Guidance, FrozenFieldTrajectoryRoundTrip) {
  const auto s = standard_schedule();
  Rng rng = make_rng(8, "traj");
  const Grid zT = gaussian_grid(8, rng);
  const Grid eps = gaussian_grid(8, rng);
  const auto steps = s.step_indices(50);
  Grid z = zT;
  for (std::size_t k = 0; k < steps.size(); ++k)
    z = ddim_step(z, steps[k], k + 1 < steps.size() ? steps[k + 1] : 0, eps, s);
  for (std::size_t k = steps.size(); k-- > 0;)
    z = ddim_invert_with_eps(z, steps[k], k + 1 < steps.size() ? steps[k + 1] : 0, eps, s);
  EXPECT_LT(norm(z - zT) / norm(zT), 1e-10);
}

// Sample-then-invert with the oracle prediction converges as the step count grows.
TEST(Guidance, OracleRoundTripShrinksWithSteps) {
  const auto s = standard_schedule();
  const MixtureWorld w = random_world(4, 3, 1, 0.5, 9);
  Rng rng = make_rng(10, "rt");
  const Grid zT = gaussian_grid(4, rng);
  const auto cond = ClassCondition::unconditional();
  double prev = INFINITY;
  for (int steps : {25, 50, 100, 200, 400}) {
    const auto st = s.step_indices(steps);
    Grid z = zT;
    for (std::size_t k = 0; k < st.size(); ++k) {
      const int tp = k + 1 < st.size() ? st[k + 1] : 0;
      z = ddim_step(z, st[k], tp, eps_theta(w, z, st[k], cond, s), s);
    }
    for (std::size_t k = st.size(); k-- > 0;) {
      const int tp = k + 1 < st.size() ? st[k + 1] : 0;
      z = ddim_invert_with_eps(z, st[k], tp, eps_theta(w, z, inversion_eval_step(tp), cond, s), s);
    }
    const double err = norm(z - zT) / norm(zT);
    EXPECT_LT(err, prev) << "steps=" << steps;
    prev = err;
  }
}
