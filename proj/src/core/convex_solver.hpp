#pragma once
#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace vumac {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// One smooth convex inequality c(x) <= 0. `support` lists the variables the
// constraint actually touches so barrier assembly costs O(|support|^2), not
// O(n^2); grad_support writes d c/d x[support[k]] into gs[k]. hess_add (may be
// null for affine constraints) accumulates H += w * hessian(c).
struct ConstraintFn {
  std::vector<int> support;
  std::function<double(const Vec&)> value;
  std::function<void(const Vec&, double* gs)> grad_support;
  std::function<void(const Vec&, Mat& H, double w)> hess_add;
};

// coef . x[idx] - rhs <= 0
ConstraintFn affine_constraint(std::vector<int> idx, std::vector<double> coef, double rhs);

struct ConvexProgram {
  int n = 0;
  std::function<double(const Vec&)> obj_value;
  std::function<void(const Vec&, Vec&)> obj_grad;  // overwrites the buffer
  std::function<void(const Vec&, Mat&)> obj_hess;  // overwrites the buffer
  std::vector<ConstraintFn> constraints;
  Vec lower, upper;  // box bounds; +-inf entries mean unbounded
  Vec start;         // must be strictly feasible
};

struct SolveReport {
  bool converged = false;
  int outer_iters = 0;
  int newton_iters = 0;
  double duality_gap = 0.0;   // m / t at the final barrier parameter
  double kkt_residual = 0.0;  // inf-norm of the stationarity residual
  std::string message;
};

struct SolveResult {
  Vec x;
  double objective = 0.0;
  SolveReport report;
};

// Interior-point solve with a log barrier: barrier parameter starts at 1 and
// grows by 10x after each Newton centering; line search is backtracking with
// Armijo fraction 0.25 and shrink 0.5, rejecting any step that leaves the
// strict interior. Throws VumacError("infeasible-start...") if `start` is not
// strictly feasible. Non-convergence is reported, not thrown.
SolveResult solve(const ConvexProgram& prog, double ktol = 1e-6);

}  // namespace vumac
