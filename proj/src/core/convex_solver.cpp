#include "core/convex_solver.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <memory>

#include "core/util.hpp"

namespace vumac {

namespace {
constexpr double kT0 = 1.0;
constexpr double kMu = 10.0;
constexpr double kArmijo = 0.25;
constexpr double kShrink = 0.5;
constexpr int kMaxNewton = 120;      // per centering
constexpr double kLambdaTol = 1e-11; // lambda^2 / 2 stopping threshold
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Workspace {
  Vec g, gobj, dx, gs;
  Mat H, Hobj;
  std::vector<double> cval;
  std::vector<std::vector<double>> cgrad;  // per constraint, support-aligned
};

// Barrier potential; +inf outside the strict interior.
double potential(const ConvexProgram& p, double t, const Vec& x) {
  double val = t * p.obj_value(x);
  for (const auto& c : p.constraints) {
    double cv = c.value(x);
    if (!(cv < 0.0)) return kInf;
    val -= std::log(-cv);
  }
  for (int i = 0; i < p.n; ++i) {
    if (std::isfinite(p.lower[i])) {
      double d = x[i] - p.lower[i];
      if (!(d > 0.0)) return kInf;
      val -= std::log(d);
    }
    if (std::isfinite(p.upper[i])) {
      double d = p.upper[i] - x[i];
      if (!(d > 0.0)) return kInf;
      val -= std::log(d);
    }
  }
  return std::isfinite(val) ? val : kInf;
}
}  // namespace

ConstraintFn affine_constraint(std::vector<int> idx, std::vector<double> coef, double rhs) {
  ConstraintFn c;
  c.support = std::move(idx);
  auto cf = std::make_shared<std::vector<double>>(std::move(coef));
  auto supp = std::make_shared<std::vector<int>>(c.support);
  c.value = [cf, supp, rhs](const Vec& x) {
    double v = -rhs;
    for (std::size_t k = 0; k < supp->size(); ++k) v += (*cf)[k] * x[(*supp)[k]];
    return v;
  };
  c.grad_support = [cf](const Vec&, double* gs) {
    for (std::size_t k = 0; k < cf->size(); ++k) gs[k] = (*cf)[k];
  };
  c.hess_add = nullptr;
  return c;
}

SolveResult solve(const ConvexProgram& prog, double ktol) {
  const int n = prog.n;
  if (n <= 0 || !prog.obj_value || !prog.obj_grad || !prog.obj_hess)
    throw VumacError("convex solve: malformed program");
  if (prog.start.size() != n || prog.lower.size() != n || prog.upper.size() != n)
    throw VumacError("convex solve: start/bounds size mismatch");
  if (!(ktol > 0.0)) throw VumacError("convex solve: ktol must be > 0");

  // Count barrier terms and check the start point is strictly interior.
  int m = static_cast<int>(prog.constraints.size());
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(prog.lower[i])) ++m;
    if (std::isfinite(prog.upper[i])) ++m;
    if (!std::isfinite(prog.start[i]) || prog.start[i] <= prog.lower[i] ||
        prog.start[i] >= prog.upper[i])
      throw VumacError("infeasible-start: variable " + std::to_string(i) + " not strictly inside its box");
  }
  for (std::size_t j = 0; j < prog.constraints.size(); ++j) {
    double cv = prog.constraints[j].value(prog.start);
    if (!(cv < 0.0))
      throw VumacError("infeasible-start: constraint " + std::to_string(j) + " has value " +
                       std::to_string(cv));
  }

  Workspace w;
  w.g.resize(n);
  w.gobj.resize(n);
  w.dx.resize(n);
  w.H.resize(n, n);
  w.Hobj.resize(n, n);
  w.cval.resize(prog.constraints.size());
  w.cgrad.resize(prog.constraints.size());
  for (std::size_t j = 0; j < prog.constraints.size(); ++j)
    w.cgrad[j].resize(prog.constraints[j].support.size());

  Vec x = prog.start;
  SolveReport rep;
  double t = kT0;
  bool stalled = false;

  // One Newton centering at barrier parameter t. Returns false on stall.
  auto center = [&](double tcur, double lam_tol) -> bool {
    double psi = potential(prog, tcur, x);
    double lam2_prev = kInf;
    for (int it = 0; it < kMaxNewton; ++it) {
      // Assemble gradient and Hessian of the barrier-augmented objective.
      prog.obj_grad(x, w.gobj);
      prog.obj_hess(x, w.Hobj);
      w.g = tcur * w.gobj;
      w.H = tcur * w.Hobj;
      for (std::size_t j = 0; j < prog.constraints.size(); ++j) {
        const auto& c = prog.constraints[j];
        double cv = c.value(x);
        w.cval[j] = cv;
        double* gs = w.cgrad[j].data();
        c.grad_support(x, gs);
        double inv = 1.0 / (-cv);
        for (std::size_t k = 0; k < c.support.size(); ++k) {
          w.g[c.support[k]] += gs[k] * inv;
          for (std::size_t l = 0; l < c.support.size(); ++l)
            w.H(c.support[k], c.support[l]) += gs[k] * gs[l] * inv * inv;
        }
        if (c.hess_add) c.hess_add(x, w.H, inv);
      }
      for (int i = 0; i < n; ++i) {
        if (std::isfinite(prog.lower[i])) {
          double d = x[i] - prog.lower[i];
          w.g[i] -= 1.0 / d;
          w.H(i, i) += 1.0 / (d * d);
        }
        if (std::isfinite(prog.upper[i])) {
          double d = prog.upper[i] - x[i];
          w.g[i] += 1.0 / d;
          w.H(i, i) += 1.0 / (d * d);
        }
      }

      Eigen::LLT<Mat> llt(w.H);
      if (llt.info() != Eigen::Success) {
        // Convexity makes H PSD; a tiny ridge recovers strict definiteness.
        double ridge = 1e-12 * (1.0 + w.H.diagonal().maxCoeff());
        for (int attempt = 0; attempt < 8 && llt.info() != Eigen::Success; ++attempt) {
          w.H.diagonal().array() += ridge;
          ridge *= 100.0;
          llt.compute(w.H);
        }
        if (llt.info() != Eigen::Success) {
          rep.message = "hessian-factorization-failed";
          return false;
        }
      }
      w.dx = llt.solve(-w.g);
      double descent = w.g.dot(w.dx);  // = -lambda^2
      if (descent > 0.0) {
        rep.message = "non-descent-direction";
        return false;
      }
      ++rep.newton_iters;
      double lam2 = -descent;
      if (std::getenv("VUMAC_SOLVER_TRACE"))
        std::fprintf(stderr, "[solver] t=%.3g it=%d lam2/2=%.3g x0=%.17g g0=%.3g H00=%.3g\n",
                     tcur, it, lam2 / 2.0, x[0], w.g[0], w.H(0, 0));
      if (lam2 / 2.0 <= lam_tol) return true;

      // When t is large the potential sits at ~t*f and the best decrement a
      // backtracking step can certify (kArmijo * lam2) falls below one ulp of
      // psi; the Armijo test then only "accepts" no-op steps. lam << 1 means
      // we are inside Newton's quadratic basin, so take the pure step while
      // it still shrinks lam2, and call the point centered once it stops.
      bool blocked = kArmijo * lam2 <= 1e-14 * (1.0 + std::abs(psi));
      if (blocked) {
        if (lam2 > 0.5 * lam2_prev) return true;  // at the numerical center
        Vec y = x + w.dx;
        double py = potential(prog, tcur, y);
        if (py < kInf) {
          x = std::move(y);
          psi = py;
          lam2_prev = lam2;
          continue;
        }
      }
      lam2_prev = lam2;

      double alpha = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls) {
        Vec y = x + alpha * w.dx;
        double py = potential(prog, tcur, y);
        if (py <= psi + kArmijo * alpha * descent) {
          x = std::move(y);
          psi = py;
          accepted = true;
          break;
        }
        alpha *= kShrink;
      }
      if (!accepted) {
        // Step underflowed: treat as converged-at-this-t if the decrement is
        // already tiny, otherwise report the stall.
        if (lam2 / 2.0 <= 1e-7 * (1.0 + std::abs(psi))) return true;
        rep.message = "line-search-stalled";
        return false;
      }
    }
    rep.message = "max-iterations";
    return false;
  };

  while (true) {
    ++rep.outer_iters;
    bool last = (m == 0) || static_cast<double>(m) / t <= ktol;
    // Centering; on the final t polish harder so the KKT residual is sharp.
    bool ok = center(t, last ? kLambdaTol * 1e-3 : kLambdaTol);
    if (!ok) {
      stalled = true;
      break;
    }
    if (m == 0 || static_cast<double>(m) / t <= ktol) break;
    t *= kMu;
  }

  rep.duality_gap = m == 0 ? 0.0 : static_cast<double>(m) / t;

  // KKT stationarity residual. The barrier's implied multipliers
  // lambda_j = 1 / (t * -c_j) are hypersensitive to ulp-level wobble in the
  // active slacks (noise ~ eps * t), so refine the significant ones by least
  // squares at the final iterate before measuring; clamped at zero they stay
  // a valid dual estimate.
  prog.obj_grad(x, w.gobj);
  Vec res = w.gobj;
  std::vector<Vec> acols;   // dense gradients of near-active constraints
  std::vector<double> alam; // their barrier multipliers
  double lam_max = 0.0;
  auto note = [&](double lam) { lam_max = std::max(lam_max, lam); };
  for (std::size_t j = 0; j < prog.constraints.size(); ++j)
    note(1.0 / (t * (-prog.constraints[j].value(x))));
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(prog.lower[i])) note(1.0 / (t * (x[i] - prog.lower[i])));
    if (std::isfinite(prog.upper[i])) note(1.0 / (t * (prog.upper[i] - x[i])));
  }
  const double lam_cut = 1e-6 * (1.0 + lam_max);
  auto add_term = [&](double lam, const Vec& grad) {
    if (lam >= lam_cut) {
      acols.push_back(grad);
      alam.push_back(lam);
    } else {
      res += lam * grad;
    }
  };
  for (std::size_t j = 0; j < prog.constraints.size(); ++j) {
    const auto& c = prog.constraints[j];
    double lam = 1.0 / (t * (-c.value(x)));
    c.grad_support(x, w.cgrad[j].data());
    Vec grad = Vec::Zero(n);
    for (std::size_t k = 0; k < c.support.size(); ++k) grad[c.support[k]] = w.cgrad[j][k];
    add_term(lam, grad);
  }
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(prog.lower[i])) {
      Vec grad = Vec::Zero(n);
      grad[i] = -1.0;
      add_term(1.0 / (t * (x[i] - prog.lower[i])), grad);
    }
    if (std::isfinite(prog.upper[i])) {
      Vec grad = Vec::Zero(n);
      grad[i] = 1.0;
      add_term(1.0 / (t * (prog.upper[i] - x[i])), grad);
    }
  }
  if (!acols.empty()) {
    const int k = static_cast<int>(acols.size());
    Mat A(n, k);
    for (int j = 0; j < k; ++j) A.col(j) = acols[j];
    Vec lam = A.colPivHouseholderQr().solve(-res);
    for (int j = 0; j < k; ++j)
      if (!(lam[j] >= 0.0) || !std::isfinite(lam[j])) lam[j] = alam[j];
    res += A * lam;
  }
  rep.kkt_residual = res.lpNorm<Eigen::Infinity>();
  rep.converged = !stalled && (m == 0 || rep.duality_gap <= ktol);
  if (rep.converged && rep.message.empty()) rep.message = "ok";

  double obj = prog.obj_value(x);
  return SolveResult{std::move(x), obj, std::move(rep)};
}

}  // namespace vumac
