#include <gtest/gtest.h>

#include "helpers.hpp"
#include "varmeta/adjoint/hessian.hpp"
#include "varmeta/adjoint/tangent_adjoint.hpp"
#include "varmeta/assimilation/fourdvar.hpp"

using namespace varmeta;

namespace {

struct Fixture {
  Grid grid;
  ModelParams params;
  StateVector base;
  Fixture(int q = 16, int n = 20) {
    grid.q = q;
    grid.n_steps = n;
    base = vt::busy_state(grid, 17);
  }
};

// problem whose observations are the exact model equivalents of the truth
AssimilationProblem perfect_problem(const Scenario& s) {
  return s.meta.inner.with_observations(
      s.meta.inner.obs().with_values(s.clean_obs.values()));
}

}  // namespace

TEST(TlmStep, ZeroInZeroOut) {
  Fixture f;
  const Perturbation z(f.grid.q);
  EXPECT_EQ(tlm_step(f.base, z, f.grid, f.params).norm(), 0.0);
}

TEST(TlmStep, IsLinear) {
  Fixture f;
  const Perturbation a = vt::random_perturbation(f.grid.q, 1);
  const Perturbation b = vt::random_perturbation(f.grid.q, 2);
  const Perturbation lhs = tlm_step(f.base, 2.5 * a + (-0.75) * b, f.grid, f.params);
  const Perturbation rhs = 2.5 * tlm_step(f.base, a, f.grid, f.params) +
                           (-0.75) * tlm_step(f.base, b, f.grid, f.params);
  EXPECT_LE((lhs.values() - rhs.values()).norm() / rhs.norm(), 1e-13);
}

TEST(TlmStep, MatchesFiniteDifferences) {
  Fixture f;
  const Perturbation d = vt::random_perturbation(f.grid.q, 3, 0.01);
  const Perturbation tl = tlm_step(f.base, d, f.grid, f.params);
  const StateVector y0 = step(f.base, f.grid, f.params);
  double best = 1.0;
  for (double eps = 1e-3; eps >= 1e-7; eps /= 10.0) {
    const StateVector y1 = step(displaced(f.base, eps * d), f.grid, f.params);
    const Eigen::VectorXd fd = (y1.values() - y0.values()) / eps;
    best = std::min(best, (fd - tl.values()).norm() / tl.norm());
  }
  EXPECT_LT(best, 1e-5);
}

TEST(AdjStep, ZeroInZeroOut) {
  Fixture f;
  EXPECT_EQ(adj_step(f.base, AdjointVariable(f.grid.q), f.grid, f.params).norm(), 0.0);
}

TEST(AdjStep, DotProductIdentity) {
  Fixture f;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Perturbation d = vt::random_perturbation(f.grid.q, 10 + s);
    const AdjointVariable l = vt::random_adjoint(f.grid.q, 20 + s);
    const double a = dot(tlm_step(f.base, d, f.grid, f.params), l);
    const double b = dot(d, adj_step(f.base, l, f.grid, f.params));
    EXPECT_LT(vt::rel(a, b), 1e-12);
  }
}

TEST(AdjStep, IsLinear) {
  Fixture f;
  const AdjointVariable a = vt::random_adjoint(f.grid.q, 4);
  const AdjointVariable b = vt::random_adjoint(f.grid.q, 5);
  const AdjointVariable lhs = adj_step(f.base, a + 3.0 * b, f.grid, f.params);
  const AdjointVariable rhs =
      adj_step(f.base, a, f.grid, f.params) + 3.0 * adj_step(f.base, b, f.grid, f.params);
  EXPECT_LE((lhs.values() - rhs.values()).norm() / rhs.norm(), 1e-13);
}

TEST(TlmPropagate, IdentityAtZero) {
  Fixture f;
  const Trajectory t = integrate(f.base, f.grid, f.params);
  const Perturbation d = vt::random_perturbation(f.grid.q, 6);
  EXPECT_EQ(tlm_propagate(t, d, 0), d);
  const AdjointVariable l = vt::random_adjoint(f.grid.q, 7);
  EXPECT_EQ(adj_propagate(t, l, 0), l);
}

TEST(TlmPropagate, ComposesStepByStep) {
  Fixture f;
  const Trajectory t = integrate(f.base, f.grid, f.params);
  const Perturbation d = vt::random_perturbation(f.grid.q, 8);
  const Perturbation k5 = tlm_propagate(t, d, 5);
  const Perturbation k6 = tlm_step(t.states[5], k5, f.grid, f.params);
  EXPECT_EQ(k6, tlm_propagate(t, d, 6));
}

TEST(TlmPropagate, MatchesFiniteDifferencesOverWindow) {
  Fixture f(20, 50);
  f.base = gaussian_bell_initial(f.grid, 5.0, 1.5, 1.0);
  const Trajectory t = integrate(f.base, f.grid, f.params);
  const Perturbation d = vt::random_perturbation(f.grid.q, 9, 0.01);
  const Perturbation tl = tlm_propagate(t, d, f.grid.n_steps);
  double best = 1.0;
  for (double eps = 1e-2; eps >= 1e-7; eps /= 10.0) {
    const StateVector yp = integrate(displaced(f.base, eps * d), f.grid, f.params).final();
    const StateVector ym = integrate(displaced(f.base, -eps * d), f.grid, f.params).final();
    const Eigen::VectorXd fd = (yp.values() - ym.values()) / (2.0 * eps);
    best = std::min(best, (fd - tl.values()).norm() / tl.norm());
  }
  EXPECT_LT(best, 1e-4);
}

TEST(AdjPropagate, DotProductOverFullWindow) {
  const Grid g;
  const ModelParams p;
  const Trajectory t = integrate(gaussian_bell_initial(g, 10.0, 1.5, 1.0), g, p);
  for (std::uint64_t s = 0; s < 3; ++s) {
    const Perturbation d = vt::random_perturbation(g.q, 30 + s);
    const AdjointVariable l = vt::random_adjoint(g.q, 40 + s);
    const double a = dot(tlm_propagate(t, d, g.n_steps), l);
    const double b = dot(d, adj_propagate(t, l, g.n_steps));
    EXPECT_LT(vt::rel(a, b), 1e-11);
  }
}

TEST(AdjPropagate, IsLinear) {
  Fixture f;
  const Trajectory t = integrate(f.base, f.grid, f.params);
  const AdjointVariable a = vt::random_adjoint(f.grid.q, 11);
  const AdjointVariable b = vt::random_adjoint(f.grid.q, 12);
  const AdjointVariable lhs = adj_propagate(t, 2.0 * a + b, 12);
  const AdjointVariable rhs = 2.0 * adj_propagate(t, a, 12) + adj_propagate(t, b, 12);
  EXPECT_LE((lhs.values() - rhs.values()).norm() / rhs.norm(), 1e-13);
}

TEST(Sweeps, AgreeWithSinglePropagations) {
  Fixture f;
  const Trajectory t = integrate(f.base, f.grid, f.params);
  const Perturbation d = vt::random_perturbation(f.grid.q, 13);
  const std::vector<int> times{0, 4, 4, 11, 20};
  const auto sweep = tlm_sweep(t, d, times);
  ASSERT_EQ(sweep.size(), times.size());
  for (std::size_t i = 0; i < times.size(); ++i)
    EXPECT_EQ(sweep[i], tlm_propagate(t, d, times[i]));

  std::vector<TimedForcing> forcings{{3, vt::random_adjoint(f.grid.q, 14)},
                                     {20, vt::random_adjoint(f.grid.q, 15)}};
  const AdjointVariable acc = adjoint_accumulate(t, forcings);
  const AdjointVariable sum =
      adj_propagate(t, forcings[0].value, 3) + adj_propagate(t, forcings[1].value, 20);
  EXPECT_LE((acc.values() - sum.values()).norm() / sum.norm(), 1e-13);
}

TEST(Hessian, ZeroDirection) {
  const Scenario s = make_scenario(vt::tiny_config(), ScenarioName::obs_values);
  const auto& p = s.meta.inner;
  const Perturbation z(p.grid().q);
  EXPECT_EQ(hessian_vector(p, p.background(), z).norm(), 0.0);
  EXPECT_EQ(hessian_vector(p, p.background(), z, HessianMode::fd_gradient).norm(), 0.0);
}

TEST(Hessian, GaussNewtonIsSymmetricPositiveDefinite) {
  const Scenario s = make_scenario(vt::tiny_config(), ScenarioName::obs_weights);
  const auto& p = s.meta.inner;
  const GaussNewtonHessian h(p, p.background());
  for (std::uint64_t k = 0; k < 3; ++k) {
    const Perturbation v = vt::random_perturbation(p.grid().q, 50 + k);
    const Perturbation w = vt::random_perturbation(p.grid().q, 60 + k);
    EXPECT_LT(vt::rel(dot(h.apply(v), w), dot(v, h.apply(w))), 1e-11);
    EXPECT_GT(dot(v, h.apply(v)), 0.0);
  }
}

TEST(Hessian, GaussNewtonMatchesGradientDifferencesAtAnalysis) {
  const Scenario s = make_scenario(vt::tiny_config(), ScenarioName::obs_weights);
  const AssimilationProblem p = perfect_problem(s);
  const StateVector xa = solve_4dvar(p).analysis;
  for (std::uint64_t k = 0; k < 2; ++k) {
    const Perturbation v = vt::random_perturbation(p.grid().q, 70 + k);
    const Perturbation gn = hessian_vector(p, xa, v, HessianMode::gauss_newton);
    const Perturbation fd = hessian_vector(p, xa, v, HessianMode::fd_gradient);
    EXPECT_LT((gn.values() - fd.values()).norm() / fd.norm(), 1e-4);
  }
}

TEST(Hessian, DampingScalesOnlyTheBackgroundTerm) {
  const Scenario s = make_scenario(vt::tiny_config(), ScenarioName::obs_weights);
  const auto& p = s.meta.inner;
  const GaussNewtonHessian h0(p, p.background());
  const GaussNewtonHessian h1 = h0.with_damping(0.5);
  const Perturbation v = vt::random_perturbation(p.grid().q, 80);
  const Perturbation diff = h1.apply(v) - h0.apply(v);
  const Perturbation expect = 0.5 * p.b_cov().apply_binv(v);
  EXPECT_LE((diff.values() - expect.values()).norm() / expect.norm(), 1e-9);
}
