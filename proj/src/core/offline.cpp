#include "core/offline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

#include "core/dynamics.hpp"
#include "core/rate_region.hpp"
#include "core/sampling.hpp"
#include "core/util.hpp"

namespace vumac {

namespace {

// Subset rate constraint for one slot: sum_S rho - g(sum_S h_i P_i) <= 0.
// Support layout: all rho indices first, then the P indices.
ConstraintFn rate_constraint(std::vector<int> rho_idx, std::vector<int> p_idx,
                             std::vector<double> h, const ScalarFn* g) {
  ConstraintFn c;
  c.support = rho_idx;
  c.support.insert(c.support.end(), p_idx.begin(), p_idx.end());
  auto nr = rho_idx.size();
  auto ri = std::make_shared<std::vector<int>>(std::move(rho_idx));
  auto pi = std::make_shared<std::vector<int>>(std::move(p_idx));
  auto hh = std::make_shared<std::vector<double>>(std::move(h));
  c.value = [ri, pi, hh, g](const Vec& x) {
    double s = 0.0, recv = 0.0;
    for (int k : *ri) s += x[k];
    for (std::size_t k = 0; k < pi->size(); ++k) recv += (*hh)[k] * x[(*pi)[k]];
    return s - g->f(recv);
  };
  c.grad_support = [ri, pi, hh, g, nr](const Vec& x, double* gs) {
    double recv = 0.0;
    for (std::size_t k = 0; k < pi->size(); ++k) recv += (*hh)[k] * x[(*pi)[k]];
    double d = g->df(recv);
    for (std::size_t k = 0; k < nr; ++k) gs[k] = 1.0;
    for (std::size_t k = 0; k < pi->size(); ++k) gs[nr + k] = -d * (*hh)[k];
  };
  c.hess_add = [pi, hh, g](const Vec& x, Mat& H, double w) {
    double recv = 0.0;
    for (std::size_t k = 0; k < pi->size(); ++k) recv += (*hh)[k] * x[(*pi)[k]];
    double q = -g->ddf(recv) * w;  // g concave -> q >= 0
    for (std::size_t k = 0; k < pi->size(); ++k)
      for (std::size_t l = 0; l < pi->size(); ++l)
        H((*pi)[k], (*pi)[l]) += q * (*hh)[k] * (*hh)[l];
  };
  return c;
}

struct PathLayout {
  int T = 0, M = 0;
  std::vector<int> first_arrival;               // T if never
  std::vector<std::vector<int>> window_start;   // [t][i], -1 before first arrival
  std::vector<std::vector<double>> w;           // importance trajectory
  std::vector<std::vector<double>> b_ub;        // zero-spend battery ceiling
  std::vector<std::vector<int>> vid_p, vid_rho, vid_b;  // -1 when eliminated
  int n = 0;
};

PathLayout analyze(const SamplePath& path, const SystemParams& params) {
  PathLayout L;
  L.T = params.horizon;
  L.M = params.num_users;
  L.first_arrival.assign(L.M, L.T);
  L.window_start.assign(L.T, std::vector<int>(L.M, -1));
  L.w.assign(L.T, std::vector<double>(L.M, 0.0));
  L.b_ub.assign(L.T, std::vector<double>(L.M, 0.0));
  L.vid_p.assign(L.T, std::vector<int>(L.M, -1));
  L.vid_rho.assign(L.T, std::vector<int>(L.M, -1));
  L.vid_b.assign(L.T, std::vector<int>(L.M, -1));
  for (int i = 0; i < L.M; ++i) {
    double wcur = 0.0, bub = 0.0;
    int win = -1;
    for (int t = 0; t < L.T; ++t) {
      if (path.arrival[t][i]) {
        if (L.first_arrival[i] == L.T) L.first_arrival[i] = t;
        win = t;
        wcur = path.weight_draw[t][i];
      }
      L.window_start[t][i] = win;
      L.w[t][i] = wcur;
      bub = std::min(bub + path.energy[t][i], params.b_max);
      L.b_ub[t][i] = bub;
    }
  }
  for (int t = 0; t < L.T; ++t)
    for (int i = 0; i < L.M; ++i) {
      if (L.b_ub[t][i] > 0.0) {
        L.vid_p[t][i] = L.n++;
        L.vid_b[t][i] = L.n++;
        if (t >= L.first_arrival[i]) L.vid_rho[t][i] = L.n++;
      }
    }
  return L;
}

}  // namespace

OfflineSolution solve_offline(const SamplePath& path, const SystemParams& params, double ktol) {
  params.validate();
  const int T = params.horizon, M = params.num_users;
  const double rmax = params.r_max, bmax = params.b_max;
  const double inv_tm = 1.0 / (static_cast<double>(T) * M);
  PathLayout L = analyze(path, params);

  OfflineSolution sol;
  sol.power.assign(T, std::vector<double>(M, 0.0));
  sol.rate.assign(T, std::vector<double>(M, 0.0));
  sol.battery.assign(T, std::vector<double>(M, 0.0));
  sol.bits.assign(T, std::vector<double>(M, 0.0));
  sol.weight = L.w;

  double obj_constant = 0.0;
  struct Term {
    double coef;
    std::vector<int> vars;
  };
  std::vector<Term> terms;
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < M; ++i) {
      if (L.w[t][i] <= 0.0) continue;
      std::vector<int> vars;
      for (int u = L.window_start[t][i]; u <= t; ++u)
        if (L.vid_rho[u][i] >= 0) vars.push_back(L.vid_rho[u][i]);
      double coef = L.w[t][i] * inv_tm;
      if (vars.empty())
        obj_constant += coef * params.cost_fn.f(rmax);
      else
        terms.push_back(Term{coef, std::move(vars)});
    }

  if (L.n == 0) {
    // Nothing controllable on this path (no harvested energy at all).
    sol.objective = obj_constant;
    sol.report.converged = true;
    sol.report.message = "degenerate-empty-program";
  } else {
    ConvexProgram prog;
    prog.n = L.n;
    const ScalarFn* f = &params.cost_fn;
    const ScalarFn* g = &params.rate_fn;
    auto tptr = std::make_shared<std::vector<Term>>(std::move(terms));
    prog.obj_value = [tptr, f, rmax, obj_constant](const Vec& x) {
      double v = obj_constant;
      for (const auto& tm : *tptr) {
        double s = 0.0;
        for (int k : tm.vars) s += x[k];
        v += tm.coef * f->f(rmax - s);
      }
      return v;
    };
    prog.obj_grad = [tptr, f, rmax](const Vec& x, Vec& gout) {
      gout.setZero();
      for (const auto& tm : *tptr) {
        double s = 0.0;
        for (int k : tm.vars) s += x[k];
        double d = -tm.coef * f->df(rmax - s);
        for (int k : tm.vars) gout[k] += d;
      }
    };
    prog.obj_hess = [tptr, f, rmax](const Vec& x, Mat& Hout) {
      Hout.setZero();
      for (const auto& tm : *tptr) {
        double s = 0.0;
        for (int k : tm.vars) s += x[k];
        double q = tm.coef * f->ddf(rmax - s);
        for (int k : tm.vars)
          for (int l : tm.vars) Hout(k, l) += q;
      }
    };

    prog.lower = Vec::Constant(L.n, -std::numeric_limits<double>::infinity());
    prog.upper = Vec::Constant(L.n, std::numeric_limits<double>::infinity());
    for (int t = 0; t < T; ++t)
      for (int i = 0; i < M; ++i) {
        if (L.vid_p[t][i] >= 0) prog.lower[L.vid_p[t][i]] = 0.0;
        if (L.vid_rho[t][i] >= 0) prog.lower[L.vid_rho[t][i]] = 0.0;
        if (L.vid_b[t][i] >= 0) prog.upper[L.vid_b[t][i]] = bmax;
      }

    for (int t = 0; t < T; ++t)
      for (int i = 0; i < M; ++i) {
        if (L.vid_b[t][i] < 0) continue;
        // Battery epigraph: B(t) <= B(t-1) - P(t-1) + E(t), eliminated
        // variables contribute zero.
        std::vector<int> idx{L.vid_b[t][i]};
        std::vector<double> coef{1.0};
        if (t > 0 && L.vid_b[t - 1][i] >= 0) {
          idx.push_back(L.vid_b[t - 1][i]);
          coef.push_back(-1.0);
          idx.push_back(L.vid_p[t - 1][i]);
          coef.push_back(1.0);
        }
        prog.constraints.push_back(affine_constraint(idx, coef, path.energy[t][i]));
        // Spend what is available: P(t) <= B(t).
        prog.constraints.push_back(
            affine_constraint({L.vid_p[t][i], L.vid_b[t][i]}, {1.0, -1.0}, 0.0));
      }

    for (int t = 0; t < T; ++t)
      for (int i = 0; i < M; ++i) {
        if (L.vid_rho[t][i] < 0) continue;
        // Bits transmitted since the last version arrival cannot exceed it.
        std::vector<int> idx;
        for (int u = L.window_start[t][i]; u <= t; ++u)
          if (L.vid_rho[u][i] >= 0) idx.push_back(L.vid_rho[u][i]);
        prog.constraints.push_back(
            affine_constraint(idx, std::vector<double>(idx.size(), 1.0), rmax));
      }

    for (int t = 0; t < T; ++t) {
      std::vector<int> active;
      for (int i = 0; i < M; ++i)
        if (L.vid_rho[t][i] >= 0) active.push_back(i);
      if (active.empty()) continue;
      auto a = static_cast<unsigned>(active.size());
      for (unsigned mask = 1; mask < (1u << a); ++mask) {
        std::vector<int> ridx, pidx;
        std::vector<double> h;
        for (unsigned k = 0; k < a; ++k)
          if (mask & (1u << k)) {
            int i = active[k];
            ridx.push_back(L.vid_rho[t][i]);
            pidx.push_back(L.vid_p[t][i]);
            h.push_back(path.gain[t][i]);
          }
        prog.constraints.push_back(rate_constraint(ridx, pidx, h, g));
      }
    }

    // Strictly interior start: simulate a battery trajectory that spends a
    // theta fraction per slot, back the epigraph variables off it with a
    // growing additive slack, and take rates well inside every subset cap.
    const double theta = 0.05;
    prog.start = Vec::Zero(L.n);
    std::vector<std::vector<double>> b_sim(T, std::vector<double>(M, 0.0)),
        p_sim(T, std::vector<double>(M, 0.0));
    for (int i = 0; i < M; ++i) {
      double b = 0.0, p = 0.0;
      for (int t = 0; t < T; ++t) {
        b = std::min(b - p + path.energy[t][i], bmax);
        p = L.vid_p[t][i] >= 0 ? theta * b : 0.0;
        b_sim[t][i] = b;
        p_sim[t][i] = p;
      }
    }
    for (int i = 0; i < M; ++i) {
      double d0 = std::numeric_limits<double>::infinity();
      for (int t = 0; t < T; ++t)
        if (L.vid_b[t][i] >= 0) d0 = std::min(d0, (1.0 - theta) * b_sim[t][i] / (2.0 * (T + 1)));
      for (int t = 0; t < T; ++t) {
        if (L.vid_b[t][i] < 0) continue;
        prog.start[L.vid_b[t][i]] = b_sim[t][i] - d0 * (t + 1);
        prog.start[L.vid_p[t][i]] = p_sim[t][i];
      }
    }
    for (int t = 0; t < T; ++t) {
      std::vector<int> active;
      for (int i = 0; i < M; ++i)
        if (L.vid_rho[t][i] >= 0) active.push_back(i);
      if (active.empty()) continue;
      auto a = static_cast<unsigned>(active.size());
      std::vector<double> cand(active.size(), std::numeric_limits<double>::infinity());
      for (unsigned mask = 1; mask < (1u << a); ++mask) {
        double recv = 0.0;
        int sz = 0;
        for (unsigned k = 0; k < a; ++k)
          if (mask & (1u << k)) {
            recv += path.gain[t][active[k]] * p_sim[t][active[k]];
            ++sz;
          }
        double share = 0.5 * g->f(recv) / sz;
        for (unsigned k = 0; k < a; ++k)
          if (mask & (1u << k)) cand[k] = std::min(cand[k], share);
      }
      for (std::size_t k = 0; k < active.size(); ++k)
        prog.start[L.vid_rho[t][active[k]]] = cand[k];
    }
    // Keep every bit-window sum strictly under r_max.
    for (int i = 0; i < M; ++i) {
      int t = L.first_arrival[i];
      while (t < T) {
        int end = t + 1;
        while (end < T && !path.arrival[end][i]) ++end;
        double total = 0.0;
        for (int u = t; u < end; ++u)
          if (L.vid_rho[u][i] >= 0) total += prog.start[L.vid_rho[u][i]];
        if (total > 0.5 * rmax) {
          double sc = 0.5 * rmax / total;
          for (int u = t; u < end; ++u)
            if (L.vid_rho[u][i] >= 0) prog.start[L.vid_rho[u][i]] *= sc;
        }
        t = end;
      }
    }

    SolveResult res = solve(prog, ktol);
    if (!res.report.converged)
      throw VumacError("offline solve failed: " + res.report.message);
    sol.report = res.report;
    for (int t = 0; t < T; ++t)
      for (int i = 0; i < M; ++i) {
        if (L.vid_p[t][i] >= 0 && t >= L.first_arrival[i]) sol.power[t][i] = res.x[L.vid_p[t][i]];
        if (L.vid_rho[t][i] >= 0) sol.rate[t][i] = res.x[L.vid_rho[t][i]];
      }
  }

  // Reconstruct the true trajectories under the extracted actions and audit
  // feasibility; the objective is recomputed from them.
  KahanSum obj;
  for (int i = 0; i < M; ++i) {
    double b = 0.0, r = 0.0;
    for (int t = 0; t < T; ++t) {
      b = evolve_battery(b, t > 0 ? sol.power[t - 1][i] : 0.0, path.energy[t][i], bmax);
      r = evolve_bits(r, t > 0 ? sol.rate[t - 1][i] : 0.0, path.arrival[t][i], rmax);
      sol.battery[t][i] = b;
      sol.bits[t][i] = r;
      if (sol.power[t][i] < -kFeasTol || sol.power[t][i] > b + kFeasTol)
        throw VumacError("offline solution violates energy feasibility");
      if (sol.rate[t][i] < -kFeasTol || sol.rate[t][i] > r + kFeasTol)
        throw VumacError("offline solution violates bit feasibility");
      obj.add(L.w[t][i] * inv_tm * params.cost_fn.f(r - sol.rate[t][i]));
    }
  }
  for (int t = 0; t < T; ++t) {
    std::vector<double> h(M), p(M), rho(M);
    for (int i = 0; i < M; ++i) {
      h[i] = path.gain[t][i];
      p[i] = sol.power[t][i];
      rho[i] = sol.rate[t][i];
    }
    if (!is_rate_feasible(params.rate_fn, h, p, rho))
      throw VumacError("offline solution violates the rate region");
  }
  sol.objective = obj.value();
  return sol;
}

TrainingDataset generate_dataset(const StochasticModel& model, const SystemParams& params,
                                 int num_paths, std::uint64_t seed) {
  params.validate();
  model.validate(params);
  if (num_paths < 1) throw VumacError("generate_dataset: num_paths must be >= 1");
  const int T = params.horizon, M = params.num_users;
  TrainingDataset ds;
  ds.num_users = M;
  ds.X.resize(static_cast<Eigen::Index>(num_paths) * T, 4 * M);
  ds.Y.resize(static_cast<Eigen::Index>(num_paths) * T, 2 * M);
  ds.path_seed.resize(static_cast<std::size_t>(num_paths) * T);
  ds.slot.resize(static_cast<std::size_t>(num_paths) * T);
  Eigen::Index row = 0;
  for (int n = 0; n < num_paths; ++n) {
    std::uint64_t ps = derive_seed(seed, static_cast<std::uint64_t>(n));
    SamplePath path = sample_path(model, params, ps);
    OfflineSolution sol = solve_offline(path, params);
    for (int t = 0; t < T; ++t, ++row) {
      for (int i = 0; i < M; ++i) {
        ds.X(row, i) = sol.battery[t][i];
        ds.X(row, M + i) = sol.bits[t][i];
        ds.X(row, 2 * M + i) = path.gain[t][i];
        ds.X(row, 3 * M + i) = sol.weight[t][i];
        ds.Y(row, i) = sol.power[t][i];
        ds.Y(row, M + i) = sol.rate[t][i];
      }
      ds.path_seed[row] = ps;
      ds.slot[row] = t;
    }
  }
  return ds;
}

void write_dataset_csv(const TrainingDataset& ds, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw VumacError("cannot open '" + file + "' for writing");
  const int M = ds.num_users;
  auto col = [&](const char* base, int i) {
    out << base << '_' << (i + 1);
  };
  for (int i = 0; i < M; ++i) { col("B", i); out << ','; }
  for (int i = 0; i < M; ++i) { col("r", i); out << ','; }
  for (int i = 0; i < M; ++i) { col("h", i); out << ','; }
  for (int i = 0; i < M; ++i) { col("w", i); out << ','; }
  for (int i = 0; i < M; ++i) { col("P", i); out << ','; }
  for (int i = 0; i < M; ++i) { col("rho", i); out << ','; }
  out << "path_seed,slot\n";
  char buf[32];
  for (Eigen::Index r = 0; r < ds.X.rows(); ++r) {
    for (Eigen::Index c = 0; c < ds.X.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", ds.X(r, c));
      out << buf << ',';
    }
    for (Eigen::Index c = 0; c < ds.Y.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", ds.Y(r, c));
      out << buf << ',';
    }
    out << ds.path_seed[r] << ',' << ds.slot[r] << '\n';
  }
  if (!out) throw VumacError("write failed for '" + file + "'");
}

TrainingDataset read_dataset_csv(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw VumacError("cannot open '" + file + "'");
  std::string header;
  if (!std::getline(in, header)) throw VumacError("empty dataset file '" + file + "'");
  // Infer M from the header: 6M value columns + path_seed + slot.
  int ncols = 1;
  for (char ch : header)
    if (ch == ',') ++ncols;
  if (ncols < 8 || (ncols - 2) % 6 != 0)
    throw VumacError("malformed dataset header in '" + file + "'");
  const int M = (ncols - 2) / 6;
  if (header.rfind("B_1,", 0) != 0)
    throw VumacError("unexpected dataset header in '" + file + "'");

  std::vector<std::vector<double>> xs, ys;
  std::vector<std::uint64_t> seeds;
  std::vector<int> slots;
  std::string line;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (static_cast<int>(cells.size()) != ncols)
      throw VumacError("dataset row " + std::to_string(lineno) + " has wrong column count");
    std::vector<double> vals(6 * M);
    try {
      for (int c = 0; c < 6 * M; ++c) vals[c] = std::stod(cells[c]);
      seeds.push_back(std::stoull(cells[6 * M]));
      slots.push_back(std::stoi(cells[6 * M + 1]));
    } catch (const std::exception&) {
      throw VumacError("dataset row " + std::to_string(lineno) + " has a malformed cell");
    }
    xs.emplace_back(vals.begin(), vals.begin() + 4 * M);
    ys.emplace_back(vals.begin() + 4 * M, vals.begin() + 6 * M);
  }
  TrainingDataset ds;
  ds.num_users = M;
  ds.X.resize(static_cast<Eigen::Index>(xs.size()), 4 * M);
  ds.Y.resize(static_cast<Eigen::Index>(xs.size()), 2 * M);
  for (std::size_t r = 0; r < xs.size(); ++r) {
    for (int c = 0; c < 4 * M; ++c) ds.X(r, c) = xs[r][c];
    for (int c = 0; c < 2 * M; ++c) ds.Y(r, c) = ys[r][c];
  }
  ds.path_seed = std::move(seeds);
  ds.slot = std::move(slots);
  return ds;
}

}  // namespace vumac
