#include "core/greedy.hpp"

#include <cmath>
#include <limits>
#include <memory>

#include "core/convex_solver.hpp"
#include "core/rate_region.hpp"
#include "core/util.hpp"

namespace vumac {

Action greedy_act(const SystemState& state, const SystemParams& params, double ktol) {
  const int M = params.num_users;
  Action act;
  act.power.resize(M);
  act.rate.assign(M, 0.0);
  for (int i = 0; i < M; ++i) act.power[i] = state.battery[i];

  // Users that can and should transmit this slot.
  std::vector<int> active;
  for (int i = 0; i < M; ++i) {
    double cap = max_single_user_rate(params.rate_fn, state.gain[i], state.battery[i]);
    if (state.weight[i] > 0.0 && state.bits[i] > 0.0 && cap > 0.0) active.push_back(i);
  }
  if (active.empty()) return act;

  const auto n = static_cast<int>(active.size());
  ConvexProgram prog;
  prog.n = n;
  const ScalarFn* f = &params.cost_fn;
  const ScalarFn* g = &params.rate_fn;
  auto w = std::make_shared<std::vector<double>>(n);
  auto r = std::make_shared<std::vector<double>>(n);
  for (int k = 0; k < n; ++k) {
    (*w)[k] = state.weight[active[k]];
    (*r)[k] = state.bits[active[k]];
  }
  prog.obj_value = [w, r, f, n](const Vec& x) {
    double v = 0.0;
    for (int k = 0; k < n; ++k) v += (*w)[k] * f->f((*r)[k] - x[k]);
    return v;
  };
  prog.obj_grad = [w, r, f, n](const Vec& x, Vec& gout) {
    for (int k = 0; k < n; ++k) gout[k] = -(*w)[k] * f->df((*r)[k] - x[k]);
  };
  prog.obj_hess = [w, r, f, n](const Vec& x, Mat& H) {
    H.setZero();
    for (int k = 0; k < n; ++k) H(k, k) = (*w)[k] * f->ddf((*r)[k] - x[k]);
  };

  // Subset rate caps; the received powers are fixed numbers here.
  std::vector<double> cap(1u << n, 0.0);
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    double recv = 0.0;
    for (int k = 0; k < n; ++k)
      if (mask & (1u << k)) recv += state.gain[active[k]] * state.battery[active[k]];
    cap[mask] = g->f(recv);
    std::vector<int> idx;
    for (int k = 0; k < n; ++k)
      if (mask & (1u << k)) idx.push_back(k);
    prog.constraints.push_back(
        affine_constraint(idx, std::vector<double>(idx.size(), 1.0), cap[mask]));
  }
  prog.lower = Vec::Zero(n);
  prog.upper = Vec::Constant(n, std::numeric_limits<double>::infinity());
  for (int k = 0; k < n; ++k) prog.upper[k] = (*r)[k];

  // Strict interior: half the worst per-capita subset share, then backed off
  // the bit ceiling.
  prog.start = Vec::Zero(n);
  std::vector<double> share(n, std::numeric_limits<double>::infinity());
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    int sz = 0;
    for (int k = 0; k < n; ++k)
      if (mask & (1u << k)) ++sz;
    for (int k = 0; k < n; ++k)
      if (mask & (1u << k)) share[k] = std::min(share[k], cap[mask] / sz);
  }
  for (int k = 0; k < n; ++k) prog.start[k] = 0.5 * std::min(share[k], (*r)[k]);

  SolveResult res = solve(prog, ktol);
  if (!res.report.converged) throw VumacError("greedy solve failed: " + res.report.message);
  for (int k = 0; k < n; ++k) act.rate[active[k]] = res.x[k];
  return act;
}

}  // namespace vumac
