#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "varmeta/errors.hpp"
#include "varmeta/harness/rng.hpp"
#include "varmeta/optim/cg.hpp"
#include "varmeta/optim/lbfgs.hpp"

using namespace varmeta;

namespace {

Eigen::MatrixXd random_spd(int n, std::uint64_t seed, double shift) {
  Rng rng(seed);
  Eigen::MatrixXd m(n, n);
  for (int j = 0; j < n; ++j) m.col(j) = rng.normal_vector(n);
  return m * m.transpose() / n + shift * Eigen::MatrixXd::Identity(n, n);
}

Objective quadratic(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  return [a, b](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = a * x - b;
    return 0.5 * x.dot(a * x) - b.dot(x);
  };
}

double rosenbrock(const Eigen::VectorXd& x, Eigen::VectorXd& g) {
  double f = 0.0;
  g.setZero();
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
    const double t = x[i + 1] - x[i] * x[i];
    const double s = 1.0 - x[i];
    f += 100.0 * t * t + s * s;
    g[i] += -400.0 * x[i] * t - 2.0 * s;
    g[i + 1] += 200.0 * t;
  }
  return f;
}

}  // namespace

TEST(Lbfgs, ConvexQuadraticReachesDirectSolve) {
  const Eigen::MatrixXd a = random_spd(10, 1, 0.5);
  Rng rng(2);
  const Eigen::VectorXd b = rng.normal_vector(10);
  const Eigen::VectorXd exact = a.ldlt().solve(b);
  SolverSettings s;
  s.max_iterations = 30;
  s.grad_tolerance = 1e-13;
  const MinimizeResult r = lbfgs_minimize(quadratic(a, b), Eigen::VectorXd::Zero(10), s);
  EXPECT_LE(r.accepted_steps(), 30);
  EXPECT_LE((r.x - exact).norm(), 1e-8 * exact.norm());
}

TEST(Lbfgs, StartAtMinimizerTakesNoStep) {
  const Eigen::MatrixXd a = random_spd(6, 3, 1.0);
  const Eigen::VectorXd b = Eigen::VectorXd::Ones(6);
  const Eigen::VectorXd exact = a.ldlt().solve(b);
  // put the start exactly on a zero-gradient point
  const Eigen::VectorXd bb = a * exact;
  const MinimizeResult r = lbfgs_minimize(quadratic(a, bb), exact, SolverSettings{});
  EXPECT_EQ(r.accepted_steps(), 0);
  EXPECT_EQ(r.x, exact);
  EXPECT_EQ(r.status, OptimizerStatus::converged);
}

TEST(Lbfgs, BoxConstrainedQuadraticSatisfiesKkt) {
  Eigen::MatrixXd a(2, 2);
  a << 2.0, 0.5, 0.5, 1.0;
  const Eigen::VectorXd b = (Eigen::VectorXd(2) << 4.0, -3.0).finished();
  SolverSettings s;
  s.bounds = Bounds{Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2)};
  s.max_iterations = 50;
  const MinimizeResult r = lbfgs_minimize(quadratic(a, b), (Eigen::VectorXd(2) << 0.5, 0.5).finished(), s);
  // hand active-set solution: x1 at its upper bound, x2 at its lower bound
  EXPECT_NEAR(r.x[0], 1.0, 1e-12);
  EXPECT_NEAR(r.x[1], 0.0, 1e-12);
  const Eigen::VectorXd g = a * r.x - b;
  EXPECT_LT((r.x - s.bounds->project(r.x - g)).norm(), 1e-6);
}

TEST(Lbfgs, IteratesStayFeasible) {
  SolverSettings s;
  s.max_iterations = 40;
  s.bounds = Bounds{Eigen::VectorXd::Constant(4, -0.5), Eigen::VectorXd::Constant(4, 0.8)};
  int checked = 0;
  lbfgs_minimize(rosenbrock, Eigen::VectorXd::Constant(4, -0.2), s,
                 [&](const IterationRecord&, const Eigen::VectorXd& x) {
                   EXPECT_TRUE((x.array() >= -0.5).all() && (x.array() <= 0.8).all());
                   ++checked;
                 });
  EXPECT_GT(checked, 1);
}

TEST(Lbfgs, AcceptedStepsSatisfySufficientDecrease) {
  SolverSettings s;
  s.max_iterations = 200;
  std::vector<Eigen::VectorXd> xs;
  std::vector<double> fs;
  const MinimizeResult r = lbfgs_minimize(rosenbrock, (Eigen::VectorXd(2) << -1.2, 1.0).finished(), s,
                                          [&](const IterationRecord& rec, const Eigen::VectorXd& x) {
                                            xs.push_back(x);
                                            fs.push_back(rec.value);
                                          });
  ASSERT_GT(xs.size(), 2u);
  for (std::size_t k = 1; k < xs.size(); ++k) {
    Eigen::VectorXd g(2);
    rosenbrock(xs[k - 1], g);
    EXPECT_LE(fs[k], fs[k - 1] + s.wolfe_c1 * g.dot(xs[k] - xs[k - 1]) + 1e-14);
  }
  EXPECT_LT((r.x - Eigen::VectorXd::Ones(2)).norm(), 1e-6);
}

TEST(Lbfgs, NonFiniteStartThrows) {
  const Objective bad = [](const Eigen::VectorXd&, Eigen::VectorXd& g) {
    g.setZero();
    return std::numeric_limits<double>::quiet_NaN();
  };
  EXPECT_THROW(lbfgs_minimize(bad, Eigen::VectorXd::Zero(3), SolverSettings{}), NonFiniteError);
}

TEST(Lbfgs, LineSearchFailureReturnsBestPoint) {
  // finite only at the start point
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(3, 1.0);
  const Objective cliff = [x0](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = x;
    return (x - x0).norm() == 0.0 ? 0.5 * x.squaredNorm() : std::numeric_limits<double>::infinity();
  };
  const MinimizeResult r = lbfgs_minimize(cliff, x0, SolverSettings{});
  EXPECT_EQ(r.status, OptimizerStatus::line_search_failed);
  EXPECT_EQ(r.x, x0);
  EXPECT_EQ(r.accepted_steps(), 0);
}

TEST(Lbfgs, RejectsBadSettings) {
  SolverSettings s;
  s.wolfe_c1 = 0.95;
  EXPECT_THROW(s.validate(2), std::invalid_argument);
  s = SolverSettings{};
  s.memory = 0;
  EXPECT_THROW(s.validate(2), std::invalid_argument);
  s = SolverSettings{};
  s.bounds = Bounds{Eigen::VectorXd::Ones(2), Eigen::VectorXd::Zero(2)};
  EXPECT_THROW(s.validate(2), std::invalid_argument);
}

TEST(Cg, IdentityInOneIteration) {
  Rng rng(4);
  const Eigen::VectorXd b = rng.normal_vector(20);
  const CgResult r = cg_solve([](const Eigen::VectorXd& v) { return v; }, b, CgSettings{});
  EXPECT_EQ(r.iterations, 1);
  EXPECT_TRUE(r.converged);
  EXPECT_LE((r.x - b).norm(), 1e-15 * b.norm());
}

TEST(Cg, RandomSpdMatchesDirectSolve) {
  const Eigen::MatrixXd a = random_spd(50, 5, 0.1);
  Rng rng(6);
  const Eigen::VectorXd b = rng.normal_vector(50);
  const Eigen::VectorXd exact = a.ldlt().solve(b);
  CgSettings s;
  s.rel_tolerance = 1e-12;
  const CgResult r = cg_solve([&](const Eigen::VectorXd& v) { return Eigen::VectorXd(a * v); }, b, s);
  EXPECT_TRUE(r.converged);
  EXPECT_LE((r.x - exact).norm(), 1e-7 * exact.norm());
  // residual norms need not fall monotonically, but the run must not stall
  EXPECT_LE(r.iterations, 100);
  EXPECT_LE(r.residual_history.back(), 1e-12 * r.residual_history.front() * 1.0001);
}

TEST(Cg, ZeroRightHandSide) {
  const CgResult r = cg_solve([](const Eigen::VectorXd& v) { return Eigen::VectorXd(2.0 * v); },
                              Eigen::VectorXd::Zero(7), CgSettings{});
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(r.x, Eigen::VectorXd::Zero(7));
  EXPECT_TRUE(r.converged);
}

TEST(Cg, IndefiniteOperatorIsDetected) {
  Eigen::VectorXd d(3);
  d << 1.0, -2.0, 3.0;
  try {
    cg_solve([&](const Eigen::VectorXd& v) { return Eigen::VectorXd(d.cwiseProduct(v)); },
             Eigen::VectorXd::Ones(3), CgSettings{});
    FAIL() << "expected IndefiniteDetected";
  } catch (const IndefiniteDetected& e) {
    EXPECT_LE(e.curvature(), 0.0);
  }
}

TEST(Cg, BudgetExhaustionIsFlaggedNotThrown) {
  const Eigen::MatrixXd a = random_spd(40, 7, 1e-3);
  CgSettings s;
  s.max_iterations = 3;
  const CgResult r = cg_solve([&](const Eigen::VectorXd& v) { return Eigen::VectorXd(a * v); },
                              Eigen::VectorXd::Ones(40), s);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 3);
  EXPECT_GT(r.final_relative_residual(), s.rel_tolerance);
}

TEST(Cg, ExactPreconditionerConvergesImmediately) {
  const Eigen::MatrixXd a = random_spd(30, 8, 0.2);
  const Eigen::LDLT<Eigen::MatrixXd> f(a);
  const CgResult r = cg_solve([&](const Eigen::VectorXd& v) { return Eigen::VectorXd(a * v); },
                              Eigen::VectorXd::Ones(30), CgSettings{},
                              [&](const Eigen::VectorXd& v) { return Eigen::VectorXd(f.solve(v)); });
  EXPECT_EQ(r.iterations, 1);
}
