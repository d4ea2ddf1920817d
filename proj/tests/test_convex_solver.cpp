#include "doctest.h"

#include <cmath>
#include <limits>

#include "core/convex_solver.hpp"
#include "core/scalar_fn.hpp"
#include "core/util.hpp"

using namespace vumac;

namespace {
const double kInf = std::numeric_limits<double>::infinity();

ConvexProgram quadratic(int n, const Vec& target) {
  ConvexProgram p;
  p.n = n;
  p.obj_value = [target](const Vec& x) { return 0.5 * (x - target).squaredNorm(); };
  p.obj_grad = [target](const Vec& x, Vec& g) { g = x - target; };
  p.obj_hess = [](const Vec& x, Mat& H) { H = Mat::Identity(x.size(), x.size()); };
  p.lower = Vec::Constant(n, -kInf);
  p.upper = Vec::Constant(n, kInf);
  p.start = Vec::Zero(n);
  return p;
}
}  // namespace

TEST_CASE("unconstrained quadratic solves to the target") {
  Vec target(3);
  target << 1.0, -2.0, 0.5;
  auto res = solve(quadratic(3, target), 1e-8);
  CHECK(res.report.converged);
  CHECK((res.x - target).lpNorm<Eigen::Infinity>() < 1e-9);
  CHECK(res.objective < 1e-16);
  CHECK(res.report.duality_gap == 0.0);
  CHECK(res.report.kkt_residual < 1e-9);
}

TEST_CASE("clipped quadratic stops at the active box bound") {
  Vec target(1);
  target << 2.0;
  auto p = quadratic(1, target);
  p.lower[0] = 0.0;
  p.upper[0] = 1.0;
  p.start[0] = 0.5;
  auto res = solve(p, 1e-10);
  CHECK(res.report.converged);
  CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(res.report.duality_gap <= 1e-10);
}

TEST_CASE("affine constraint clips the optimum") {
  Vec target(2);
  target << 2.0, 2.0;
  auto p = quadratic(2, target);
  // x0 + x1 <= 2; symmetric optimum at (1, 1).
  p.constraints.push_back(affine_constraint({0, 1}, {1.0, 1.0}, 2.0));
  auto res = solve(p, 1e-10);
  CHECK(res.report.converged);
  CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(res.x[1] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(res.objective == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(res.report.kkt_residual < 1e-6);
}

TEST_CASE("weighted exponential with a rate cap lands on the cap") {
  // minimize 2 exp(-x) subject to x <= log 2, 0 <= x <= 4: the cap binds.
  ConvexProgram p;
  p.n = 1;
  p.obj_value = [](const Vec& x) { return 2.0 * std::exp(-x[0]); };
  p.obj_grad = [](const Vec& x, Vec& g) { g[0] = -2.0 * std::exp(-x[0]); };
  p.obj_hess = [](const Vec& x, Mat& H) { H(0, 0) = 2.0 * std::exp(-x[0]); };
  p.constraints.push_back(affine_constraint({0}, {1.0}, std::log(2.0)));
  p.lower = Vec::Zero(1);
  p.upper = Vec::Constant(1, 4.0);
  p.start = Vec::Constant(1, 0.5 * std::log(2.0));
  auto res = solve(p, 1e-8);
  CHECK(res.report.converged);
  CHECK(res.x[0] == doctest::Approx(std::log(2.0)).epsilon(1e-7));
  CHECK(res.objective == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(res.report.duality_gap <= 1e-8);
  CHECK(res.report.kkt_residual < 1e-6);
}

TEST_CASE("matches a fine grid search on a two-user rate split") {
  // minimize 2 f(4 - x0) + f(3 - x1) with f(u) = exp(u - 4),
  // s.t. x0 <= log 2, x1 <= log 2, x0 + x1 <= log 3, 0 <= xi <= ri.
  ScalarFn f = make_cost_fn("exp-distortion", 4.0);
  auto obj = [&](double a, double b) { return 2.0 * f.f(4.0 - a) + f.f(3.0 - b); };
  double caps = std::log(2.0), capj = std::log(3.0);

  double best = kInf, ba = 0, bb = 0;
  int n = 2000;
  for (int i = 0; i <= n; ++i) {
    double a = caps * i / n;
    for (int j = 0; j <= n; ++j) {
      double b = caps * j / n;
      if (a + b > capj) break;
      double v = obj(a, b);
      if (v < best) best = v, ba = a, bb = b;
    }
  }

  ConvexProgram p;
  p.n = 2;
  p.obj_value = [&](const Vec& x) { return obj(x[0], x[1]); };
  p.obj_grad = [&](const Vec& x, Vec& g) {
    g[0] = -2.0 * f.df(4.0 - x[0]);
    g[1] = -f.df(3.0 - x[1]);
  };
  p.obj_hess = [&](const Vec& x, Mat& H) {
    H.setZero();
    H(0, 0) = 2.0 * f.ddf(4.0 - x[0]);
    H(1, 1) = f.ddf(3.0 - x[1]);
  };
  p.constraints.push_back(affine_constraint({0}, {1.0}, caps));
  p.constraints.push_back(affine_constraint({1}, {1.0}, caps));
  p.constraints.push_back(affine_constraint({0, 1}, {1.0, 1.0}, capj));
  p.lower = Vec::Zero(2);
  p.upper = Vec::Constant(2, 4.0);
  p.start = Vec::Constant(2, 0.25 * capj);
  auto res = solve(p, 1e-8);

  CHECK(res.report.converged);
  CHECK(res.objective <= best + 1e-4);
  CHECK(std::abs(res.x[0] - ba) < 2e-3);
  CHECK(std::abs(res.x[1] - bb) < 2e-3);
}

TEST_CASE("nonlinear constraint with curvature uses hess_add") {
  // minimize (x0 - 3)^2 + (x1 - 3)^2 s.t. x0^2 + x1^2 <= 2: optimum (1, 1).
  Vec target(2);
  target << 3.0, 3.0;
  auto p = quadratic(2, target);
  ConstraintFn ball;
  ball.support = {0, 1};
  ball.value = [](const Vec& x) { return x[0] * x[0] + x[1] * x[1] - 2.0; };
  ball.grad_support = [](const Vec& x, double* gs) {
    gs[0] = 2.0 * x[0];
    gs[1] = 2.0 * x[1];
  };
  ball.hess_add = [](const Vec&, Mat& H, double w) {
    H(0, 0) += 2.0 * w;
    H(1, 1) += 2.0 * w;
  };
  p.constraints.push_back(ball);
  p.start = Vec::Zero(2);
  auto res = solve(p, 1e-10);
  CHECK(res.report.converged);
  CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(res.x[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("affine constraint gradients agree with finite differences") {
  auto c = affine_constraint({0, 2}, {1.5, -2.0}, 3.0);
  Vec x(3);
  x << 0.3, 9.9, -0.7;
  double gs[2];
  c.grad_support(x, gs);
  double h = 1e-6;
  for (int k = 0; k < 2; ++k) {
    int idx = c.support[k];
    Vec xp = x, xm = x;
    xp[idx] += h;
    xm[idx] -= h;
    CHECK(gs[k] == doctest::Approx((c.value(xp) - c.value(xm)) / (2 * h)).epsilon(1e-6));
  }
  CHECK(c.value(x) == doctest::Approx(0.3 * 1.5 + 0.7 * 2.0 - 3.0).epsilon(1e-12));
}

TEST_CASE("infeasible or malformed inputs throw") {
  Vec target(1);
  target << 0.0;
  auto p = quadratic(1, target);
  p.lower[0] = 0.0;
  p.upper[0] = 1.0;
  p.start[0] = 1.0;  // on the bound: not strict
  CHECK_THROWS_WITH_AS(solve(p, 1e-8).objective, doctest::Contains("infeasible-start"),
                       VumacError);
  p.start[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(solve(p, 1e-8), VumacError);
  p.start[0] = 0.5;
  p.constraints.push_back(affine_constraint({0}, {1.0}, 0.25));  // start violates it
  CHECK_THROWS_AS(solve(p, 1e-8), VumacError);

  ConvexProgram bad;
  bad.n = 0;
  CHECK_THROWS_AS(solve(bad, 1e-8), VumacError);
  auto q = quadratic(1, target);
  CHECK_THROWS_AS(solve(q, -1.0), VumacError);
}

TEST_CASE("report counters are populated") {
  Vec target(2);
  target << 5.0, 5.0;
  auto p = quadratic(2, target);
  p.upper = Vec::Constant(2, 1.0);
  p.lower = Vec::Zero(2);
  p.start = Vec::Constant(2, 0.5);
  auto res = solve(p, 1e-9);
  CHECK(res.report.converged);
  CHECK(res.report.outer_iters >= 5);  // 4 box terms, t climbs to >= 4e9
  CHECK(res.report.newton_iters >= res.report.outer_iters);
  CHECK(res.report.message == "ok");
  CHECK(res.report.duality_gap <= 1e-9);
}
