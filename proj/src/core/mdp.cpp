#include "core/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <unordered_map>

#include "core/dynamics.hpp"
#include "core/rate_region.hpp"
#include "core/util.hpp"

namespace vumac {

namespace {
constexpr double kGridTol = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

int find_grid(const std::vector<double>& grid, double v, double tol = kGridTol) {
  auto it = std::lower_bound(grid.begin(), grid.end(), v - tol);
  if (it != grid.end() && std::abs(*it - v) <= tol) return static_cast<int>(it - grid.begin());
  return -1;
}

// Largest grid point <= v (within tolerance); -1 if v is below the grid.
int floor_grid(const std::vector<double>& grid, double v, double tol = kGridTol) {
  auto it = std::upper_bound(grid.begin(), grid.end(), v + tol);
  if (it == grid.begin()) return -1;
  return static_cast<int>(it - grid.begin()) - 1;
}

void check_grid_vector(const std::vector<double>& g, const char* name) {
  if (g.empty()) throw VumacError(std::string(name) + " grid is empty");
  if (g.size() > 255) throw VumacError(std::string(name) + " grid exceeds 255 points");
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!std::isfinite(g[k]) || g[k] < 0.0)
      throw VumacError(std::string(name) + " grid must be finite and non-negative");
    if (k > 0 && !(g[k] > g[k - 1]))
      throw VumacError(std::string(name) + " grid must be strictly increasing");
  }
}
}  // namespace

void check_grid_closure(const SystemParams& params, const StochasticModel& model,
                        const DiscretizationSpec& disc) {
  check_grid_vector(disc.battery_grid, "battery");
  check_grid_vector(disc.bits_grid, "bits");
  check_grid_vector(disc.power_grid, "power");
  check_grid_vector(disc.rate_grid, "rate");
  if (find_grid(disc.battery_grid, 0.0) < 0)
    throw VumacError("battery grid must contain 0");
  if (find_grid(disc.battery_grid, params.b_max) < 0)
    throw VumacError("battery grid must contain b_max");
  if (find_grid(disc.bits_grid, 0.0) < 0) throw VumacError("bits grid must contain 0");
  if (find_grid(disc.bits_grid, params.r_max) < 0)
    throw VumacError("bits grid must contain r_max (arrivals reset to it)");
  if (disc.battery_grid.back() > params.b_max + kGridTol)
    throw VumacError("battery grid exceeds b_max");
  if (disc.bits_grid.back() > params.r_max + kGridTol)
    throw VumacError("bits grid exceeds r_max");

  for (int i = 0; i < params.num_users; ++i)
    for (double b : disc.battery_grid)
      for (double p : disc.power_grid) {
        if (p > b + kFeasTol) continue;
        for (double e : model.energy[i].support) {
          double v = evolve_battery(b, p, e, params.b_max);
          if (find_grid(disc.battery_grid, v) < 0)
            throw VumacError("battery grid not closed: user " + std::to_string(i) + " B=" +
                             std::to_string(b) + " P=" + std::to_string(p) + " E=" +
                             std::to_string(e) + " -> " + std::to_string(v));
        }
      }
  for (double r : disc.bits_grid)
    for (double rho : disc.rate_grid) {
      if (rho > r + kFeasTol) continue;
      double v = r - rho;
      if (find_grid(disc.bits_grid, v) < 0)
        throw VumacError("bits grid not closed: r=" + std::to_string(r) + " rho=" +
                         std::to_string(rho) + " -> " + std::to_string(v));
    }
}

MdpSolver::MdpSolver(const SystemParams& params, const StochasticModel& model,
                     const DiscretizationSpec& disc)
    : params_(params), model_(model), disc_(disc) {
  params_.validate();
  model_.validate(params_);
  check_grid_closure(params_, model_, disc_);
  M_ = params_.num_users;
  T_ = params_.horizon;
  nb_ = static_cast<int>(disc_.battery_grid.size());
  nr_ = static_cast<int>(disc_.bits_grid.size());
  np_ = static_cast<int>(disc_.power_grid.size());
  nrho_ = static_cast<int>(disc_.rate_grid.size());
  nh_.resize(M_);
  for (int i = 0; i < M_; ++i) nh_[i] = static_cast<int>(model_.channel[i].support.size());

  // Weight states: 0 (no version seen yet) plus the importance support.
  w_states_.push_back(0.0);
  for (double w : model_.weight.support)
    if (find_grid(w_states_, w, 1e-12) < 0) w_states_.push_back(w);
  std::sort(w_states_.begin(), w_states_.end());
  nw_ = static_cast<int>(w_states_.size());
  wdraw_state_.resize(model_.weight.support.size());
  for (std::size_t k = 0; k < model_.weight.support.size(); ++k)
    wdraw_state_[k] = find_grid(w_states_, model_.weight.support[k], 1e-12);

  stride_b_.resize(M_);
  stride_r_.resize(M_);
  stride_h_.resize(M_);
  stride_w_.resize(M_);
  long long s = 1;
  for (int i = 0; i < M_; ++i) { stride_b_[i] = s; s *= nb_; }
  for (int i = 0; i < M_; ++i) { stride_r_[i] = s; s *= nr_; }
  for (int i = 0; i < M_; ++i) { stride_h_[i] = s; s *= nh_[i]; }
  long long brh = s;
  for (int i = 0; i < M_; ++i) { stride_w_[i] = s; s *= nw_; }
  if (s > 50'000'000LL) throw VumacError("state space too large: " + std::to_string(s));
  n_states_ = static_cast<int>(s);
  n_brh_ = static_cast<int>(brh);

  build_tables();
  build_joint_combos();
}

void MdpSolver::build_tables() {
  f_tab_.assign(nr_, std::vector<double>(nrho_, kInf));
  qpair_.assign(nr_, std::vector<int>(nrho_, -1));
  for (int r = 0; r < nr_; ++r)
    for (int q = 0; q < nrho_; ++q) {
      double rv = disc_.bits_grid[r], qv = disc_.rate_grid[q];
      if (qv > rv + kFeasTol) continue;
      f_tab_[r][q] = params_.cost_fn.f(rv - qv);
      qpair_[r][q] = find_grid(disc_.bits_grid, rv - qv);
    }
  rmax_idx_ = find_grid(disc_.bits_grid, params_.r_max);

  // Unique post-decision battery residuals.
  std::vector<double> ds;
  for (int b = 0; b < nb_; ++b)
    for (int p = 0; p < np_; ++p)
      if (disc_.power_grid[p] <= disc_.battery_grid[b] + kFeasTol)
        ds.push_back(disc_.battery_grid[b] - disc_.power_grid[p]);
  std::sort(ds.begin(), ds.end());
  for (double v : ds)
    if (d_grid_.empty() || v > d_grid_.back() + 1e-12) d_grid_.push_back(v);
  dpair_.assign(nb_, std::vector<int>(np_, -1));
  for (int b = 0; b < nb_; ++b)
    for (int p = 0; p < np_; ++p)
      if (disc_.power_grid[p] <= disc_.battery_grid[b] + kFeasTol)
        dpair_[b][p] = find_grid(d_grid_, disc_.battery_grid[b] - disc_.power_grid[p], 1e-12);

  next_b_.assign(M_, std::vector<std::vector<int>>(d_grid_.size()));
  for (int i = 0; i < M_; ++i)
    for (std::size_t d = 0; d < d_grid_.size(); ++d) {
      auto& row = next_b_[i][d];
      row.resize(model_.energy[i].support.size());
      for (std::size_t e = 0; e < row.size(); ++e) {
        double v = d_grid_[d] + model_.energy[i].support[e];
        if (v > params_.b_max) v = params_.b_max;
        row[e] = find_grid(disc_.battery_grid, v);
        if (row[e] < 0)
          throw VumacError("internal: residual battery left the grid");
      }
    }

  // U-cache strides: residual digits, then bits digits, then weight digits.
  ustride_d_.resize(M_);
  ustride_q_.resize(M_);
  ustride_w_.resize(M_);
  long long s = 1;
  for (int i = 0; i < M_; ++i) { ustride_d_[i] = s; s *= static_cast<long long>(d_grid_.size()); }
  for (int i = 0; i < M_; ++i) { ustride_q_[i] = s; s *= nr_; }
  for (int i = 0; i < M_; ++i) { ustride_w_[i] = s; s *= nw_; }
  n_u_ = s;
  if (n_u_ > 50'000'000LL) throw VumacError("post-decision cache too large");

  // Feasible actions per (battery, bits, gain) block, enumerated in ascending
  // lexicographic order of the concatenated (P_1..P_M, rho_1..rho_M) vector
  // so ties resolve to the smallest action.
  act_cache_.resize(n_brh_);
  std::vector<int> b_idx(M_), r_idx(M_), h_idx(M_);
  std::vector<double> h_val(M_), p_val(M_), rho_val(M_);
  for (int c = 0; c < n_brh_; ++c) {
    int rem = c;
    for (int i = 0; i < M_; ++i) { b_idx[i] = rem % nb_; rem /= nb_; }
    for (int i = 0; i < M_; ++i) { r_idx[i] = rem % nr_; rem /= nr_; }
    for (int i = 0; i < M_; ++i) { h_idx[i] = rem % nh_[i]; rem /= nh_[i]; }
    for (int i = 0; i < M_; ++i) h_val[i] = model_.channel[i].support[h_idx[i]];

    std::vector<int> pmax(M_), rhomax(M_);
    for (int i = 0; i < M_; ++i) {
      pmax[i] = floor_grid(disc_.power_grid, disc_.battery_grid[b_idx[i]], kFeasTol);
      rhomax[i] = floor_grid(disc_.rate_grid, disc_.bits_grid[r_idx[i]], kFeasTol);
      if (pmax[i] < 0 || rhomax[i] < 0)
        throw VumacError("grids must contain a zero power/rate action");
    }
    ActionList& list = act_cache_[c];
    std::vector<int> p(M_, 0), q(M_, 0);
    bool more_p = true;
    while (more_p) {
      for (int i = 0; i < M_; ++i) p_val[i] = disc_.power_grid[p[i]];
      std::fill(q.begin(), q.end(), 0);
      bool more_q = true;
      while (more_q) {
        for (int i = 0; i < M_; ++i) rho_val[i] = disc_.rate_grid[q[i]];
        if (is_rate_feasible(params_.rate_fn, h_val, p_val, rho_val, kFeasTol)) {
          for (int i = 0; i < M_; ++i) list.flat.push_back(static_cast<std::uint8_t>(p[i]));
          for (int i = 0; i < M_; ++i) list.flat.push_back(static_cast<std::uint8_t>(q[i]));
          ++list.count;
        }
        // Advance rho odometer, last user fastest.
        int k = M_ - 1;
        while (k >= 0) {
          if (q[k] < rhomax[k]) { ++q[k]; break; }
          q[k] = 0;
          --k;
        }
        more_q = k >= 0;
      }
      int k = M_ - 1;
      while (k >= 0) {
        if (p[k] < pmax[k]) { ++p[k]; break; }
        p[k] = 0;
        --k;
      }
      more_p = k >= 0;
    }
    if (list.count == 0)
      throw VumacError("internal: no feasible action at some state");

    // Same-rho dominance: with the rate vector fixed the stage cost is
    // identical and the continuation is non-increasing in every battery
    // residual, so only componentwise-minimal power vectors can win. A
    // dominator is lexicographically smaller, hence removing dominated
    // actions also preserves the smallest-action tie-break.
    std::unordered_map<long long, std::vector<int>> groups;
    for (int a = 0; a < list.count; ++a) {
      const std::uint8_t* f = list.flat.data() + static_cast<std::size_t>(a) * 2 * M_;
      long long key = 0;
      for (int i = 0; i < M_; ++i) key = key * nrho_ + f[M_ + i];
      auto& g = groups[key];
      bool dominated = false;
      for (int m : g) {
        const std::uint8_t* fm = list.flat.data() + static_cast<std::size_t>(m) * 2 * M_;
        bool le = true;
        for (int i = 0; i < M_ && le; ++i) le = fm[i] <= f[i];
        if (le) { dominated = true; break; }
      }
      if (!dominated) {
        g.push_back(a);
        list.minimal.push_back(a);
      }
    }
  }
}

void MdpSolver::build_joint_combos() {
  struct UserCombo {
    std::uint8_t e, a, wd, h;
    double prob;
  };
  std::vector<std::vector<UserCombo>> per_user(M_);
  for (int i = 0; i < M_; ++i) {
    const auto& en = model_.energy[i];
    const auto& ch = model_.channel[i];
    double pa = model_.arrival_prob[i];
    for (std::size_t e = 0; e < en.support.size(); ++e)
      for (int a = 0; a <= 1; ++a)
        for (std::size_t wd = 0; wd < model_.weight.support.size(); ++wd)
          for (std::size_t h = 0; h < ch.support.size(); ++h)
            per_user[i].push_back(UserCombo{static_cast<std::uint8_t>(e),
                                            static_cast<std::uint8_t>(a),
                                            static_cast<std::uint8_t>(wd),
                                            static_cast<std::uint8_t>(h),
                                            en.probs[e] * (a ? pa : 1.0 - pa) *
                                                model_.weight.probs[wd] * ch.probs[h]});
  }
  long long total = 1;
  for (int i = 0; i < M_; ++i) {
    total *= static_cast<long long>(per_user[i].size());
    if (total > 2'000'000LL) throw VumacError("joint draw table too large");
  }
  n_joint_ = static_cast<int>(total);
  jprob_.resize(n_joint_);
  je_.resize(static_cast<std::size_t>(n_joint_) * M_);
  ja_.resize(je_.size());
  jwd_.resize(je_.size());
  jh_.resize(je_.size());
  std::vector<std::size_t> digit(M_, 0);
  for (int j = 0; j < n_joint_; ++j) {
    double prob = 1.0;
    for (int i = 0; i < M_; ++i) {
      const UserCombo& uc = per_user[i][digit[i]];
      prob *= uc.prob;
      je_[static_cast<std::size_t>(j) * M_ + i] = uc.e;
      ja_[static_cast<std::size_t>(j) * M_ + i] = uc.a;
      jwd_[static_cast<std::size_t>(j) * M_ + i] = uc.wd;
      jh_[static_cast<std::size_t>(j) * M_ + i] = uc.h;
    }
    jprob_[j] = prob;
    // Advance, user M-1 fastest (user 0 outermost).
    int k = M_ - 1;
    while (k >= 0) {
      if (++digit[k] < per_user[k].size()) break;
      digit[k] = 0;
      --k;
    }
  }
}

double MdpSolver::u_entry(const std::vector<double>& v_next, const std::vector<int>& d_idx,
                          const std::vector<int>& q_idx, const std::vector<int>& w_idx) const {
  double sum = 0.0;
  for (int j = 0; j < n_joint_; ++j) {
    std::size_t base = static_cast<std::size_t>(j) * M_;
    long long idx = 0;
    for (int i = 0; i < M_; ++i) {
      int a = ja_[base + i];
      idx += static_cast<long long>(next_b_[i][d_idx[i]][je_[base + i]]) * stride_b_[i];
      idx += static_cast<long long>(a ? rmax_idx_ : q_idx[i]) * stride_r_[i];
      idx += static_cast<long long>(jh_[base + i]) * stride_h_[i];
      idx += static_cast<long long>(a ? wdraw_state_[jwd_[base + i]] : w_idx[i]) * stride_w_[i];
    }
    sum += jprob_[j] * v_next[static_cast<std::size_t>(idx)];
  }
  return sum;
}

double MdpSolver::stage_cost_at(const std::vector<int>& r_idx, const std::vector<int>& w_idx,
                                const std::vector<int>& rho_idx) const {
  double c = 0.0;
  for (int i = 0; i < M_; ++i) c += w_states_[w_idx[i]] * f_tab_[r_idx[i]][rho_idx[i]];
  return c;
}

double MdpSolver::transition_expectation(const std::vector<int>& b_idx,
                                         const std::vector<int>& r_idx,
                                         const std::vector<int>& h_idx,
                                         const std::vector<int>& w_idx,
                                         const std::vector<int>& p_idx,
                                         const std::vector<int>& rho_idx,
                                         const std::vector<double>& v_next) const {
  if (static_cast<int>(v_next.size()) != n_states_)
    throw VumacError("transition_expectation: value layer has wrong size");
  std::vector<int> d(M_), q(M_);
  std::vector<double> hv(M_), pv(M_), rhov(M_);
  for (int i = 0; i < M_; ++i) {
    d[i] = dpair_[b_idx[i]][p_idx[i]];
    q[i] = qpair_[r_idx[i]][rho_idx[i]];
    if (d[i] < 0 || q[i] < 0) throw VumacError("transition_expectation: infeasible action");
    hv[i] = model_.channel[i].support[h_idx[i]];
    pv[i] = disc_.power_grid[p_idx[i]];
    rhov[i] = disc_.rate_grid[rho_idx[i]];
  }
  if (!is_rate_feasible(params_.rate_fn, hv, pv, rhov, kFeasTol))
    throw VumacError("transition_expectation: infeasible action");
  return stage_cost_at(r_idx, w_idx, rho_idx) + u_entry(v_next, d, q, w_idx);
}

std::vector<GridAction> MdpSolver::enumerate_feasible_actions(const std::vector<int>& b_idx,
                                                              const std::vector<int>& r_idx,
                                                              const std::vector<int>& h_idx) const {
  long long c = 0;
  for (int i = 0; i < M_; ++i) c += static_cast<long long>(b_idx[i]) * stride_b_[i];
  for (int i = 0; i < M_; ++i) c += static_cast<long long>(r_idx[i]) * stride_r_[i];
  for (int i = 0; i < M_; ++i) c += static_cast<long long>(h_idx[i]) * stride_h_[i];
  const ActionList& list = act_cache_[static_cast<std::size_t>(c)];
  std::vector<GridAction> out(list.count);
  for (int a = 0; a < list.count; ++a) {
    const std::uint8_t* f = list.flat.data() + static_cast<std::size_t>(a) * 2 * M_;
    out[a].p.assign(f, f + M_);
    out[a].rho.assign(f + M_, f + 2 * M_);
  }
  return out;
}

int MdpSolver::state_index(const std::vector<int>& b_idx, const std::vector<int>& r_idx,
                           const std::vector<int>& h_idx, const std::vector<int>& w_idx) const {
  long long s = 0;
  for (int i = 0; i < M_; ++i) s += static_cast<long long>(b_idx[i]) * stride_b_[i];
  for (int i = 0; i < M_; ++i) s += static_cast<long long>(r_idx[i]) * stride_r_[i];
  for (int i = 0; i < M_; ++i) s += static_cast<long long>(h_idx[i]) * stride_h_[i];
  for (int i = 0; i < M_; ++i) s += static_cast<long long>(w_idx[i]) * stride_w_[i];
  return static_cast<int>(s);
}

void MdpSolver::state_digits(int s, std::vector<int>& b_idx, std::vector<int>& r_idx,
                             std::vector<int>& h_idx, std::vector<int>& w_idx) const {
  b_idx.resize(M_);
  r_idx.resize(M_);
  h_idx.resize(M_);
  w_idx.resize(M_);
  int rem = s;
  for (int i = 0; i < M_; ++i) { b_idx[i] = rem % nb_; rem /= nb_; }
  for (int i = 0; i < M_; ++i) { r_idx[i] = rem % nr_; rem /= nr_; }
  for (int i = 0; i < M_; ++i) { h_idx[i] = rem % nh_[i]; rem /= nh_[i]; }
  for (int i = 0; i < M_; ++i) { w_idx[i] = rem % nw_; rem /= nw_; }
}

MdpTable MdpSolver::solve(bool monotone) const {
  MdpTable tab;
  tab.num_users = M_;
  tab.horizon = T_;
  tab.disc = disc_;
  tab.w_states = w_states_;
  tab.channel_support.resize(M_);
  for (int i = 0; i < M_; ++i) tab.channel_support[i] = model_.channel[i].support;
  tab.value.assign(T_, std::vector<double>(n_states_));
  tab.action.assign(T_, std::vector<std::uint8_t>(static_cast<std::size_t>(n_states_) * 2 * M_));

  std::vector<double> U(static_cast<std::size_t>(n_u_));
  std::vector<int> b_idx(M_), r_idx(M_), h_idx(M_), w_idx(M_);
  std::vector<int> du(M_), qu(M_), wu(M_);
  std::uint64_t evals = 0;

  for (int t = T_ - 1; t >= 0; --t) {
    const std::vector<double>* vnext = (t + 1 < T_) ? &tab.value[t + 1] : nullptr;
    if (vnext) {
      // Post-decision cache: expectation of the next layer as a function of
      // the battery residual, the post-transmission bits and the weights.
      std::size_t u = 0;
      std::fill(du.begin(), du.end(), 0);
      std::fill(qu.begin(), qu.end(), 0);
      std::fill(wu.begin(), wu.end(), 0);
      const int nd = static_cast<int>(d_grid_.size());
      bool more = true;
      while (more) {
        U[u++] = u_entry(*vnext, du, qu, wu);
        // Odometer: d digits fastest, then q, then w.
        int k = 0;
        more = false;
        for (k = 0; k < M_; ++k) {
          if (du[k] + 1 < nd) { ++du[k]; more = true; break; }
          du[k] = 0;
        }
        if (!more)
          for (k = 0; k < M_; ++k) {
            if (qu[k] + 1 < nr_) { ++qu[k]; more = true; break; }
            qu[k] = 0;
          }
        if (!more)
          for (k = 0; k < M_; ++k) {
            if (wu[k] + 1 < nw_) { ++wu[k]; more = true; break; }
            wu[k] = 0;
          }
      }
    }

    std::vector<double>& V = tab.value[t];
    std::vector<std::uint8_t>& A = tab.action[t];
    std::fill(b_idx.begin(), b_idx.end(), 0);
    std::fill(r_idx.begin(), r_idx.end(), 0);
    std::fill(h_idx.begin(), h_idx.end(), 0);
    std::fill(w_idx.begin(), w_idx.end(), 0);
    for (int s = 0; s < n_states_; ++s) {
      const ActionList& list = act_cache_[s % n_brh_];
      long long uwbase = 0;
      for (int i = 0; i < M_; ++i) uwbase += static_cast<long long>(w_idx[i]) * ustride_w_[i];

      auto q_of = [&](const std::uint8_t* act) -> double {
        double qv = 0.0;
        for (int i = 0; i < M_; ++i) qv += w_states_[w_idx[i]] * f_tab_[r_idx[i]][act[M_ + i]];
        if (vnext) {
          long long idx = uwbase;
          for (int i = 0; i < M_; ++i) {
            idx += static_cast<long long>(dpair_[b_idx[i]][act[i]]) * ustride_d_[i];
            idx += static_cast<long long>(qpair_[r_idx[i]][act[M_ + i]]) * ustride_q_[i];
          }
          qv += U[static_cast<std::size_t>(idx)];
        }
        return qv;
      };

      double best = kInf;
      const std::uint8_t* best_act = nullptr;
      auto full_sweep = [&]() {
        for (int a = 0; a < list.count; ++a) {
          const std::uint8_t* act = list.flat.data() + static_cast<std::size_t>(a) * 2 * M_;
          double qv = q_of(act);
          ++evals;
          if (qv < best) {
            best = qv;
            best_act = act;
          }
        }
      };

      if (monotone) {
        for (int m : list.minimal) {
          const std::uint8_t* act = list.flat.data() + static_cast<std::size_t>(m) * 2 * M_;
          double qv = q_of(act);
          ++evals;
          if (qv < best) {
            best = qv;
            best_act = act;
          }
        }
        // Guard: the value cannot rise as a battery falls. A violation would
        // mean the reduction dropped a winner; redo without it.
        bool suspicious = best_act == nullptr;
        for (int i = 0; i < M_ && !suspicious; ++i)
          if (b_idx[i] > 0 && best > V[s - stride_b_[i]]) suspicious = true;
        if (suspicious) {
          best = kInf;
          best_act = nullptr;
          full_sweep();
        }
      } else {
        full_sweep();
      }

      V[s] = best;
      std::memcpy(A.data() + static_cast<std::size_t>(s) * 2 * M_, best_act, 2 * M_);

      // Advance the state odometer (battery digits fastest).
      bool more = false;
      for (int k = 0; k < M_ && !more; ++k) {
        if (b_idx[k] + 1 < nb_) { ++b_idx[k]; more = true; } else b_idx[k] = 0;
      }
      for (int k = 0; k < M_ && !more; ++k) {
        if (r_idx[k] + 1 < nr_) { ++r_idx[k]; more = true; } else r_idx[k] = 0;
      }
      for (int k = 0; k < M_ && !more; ++k) {
        if (h_idx[k] + 1 < nh_[k]) { ++h_idx[k]; more = true; } else h_idx[k] = 0;
      }
      for (int k = 0; k < M_ && !more; ++k) {
        if (w_idx[k] + 1 < nw_) { ++w_idx[k]; more = true; } else w_idx[k] = 0;
      }
    }
  }
  tab.action_evaluations = evals;
  return tab;
}

MdpTable solve_mdp(const SystemParams& params, const StochasticModel& model,
                   const DiscretizationSpec& disc, bool monotone) {
  return MdpSolver(params, model, disc).solve(monotone);
}

Action mdp_act(const MdpTable& table, const SystemState& state, int t) {
  const int M = table.num_users;
  if (static_cast<int>(state.battery.size()) != M)
    throw VumacError("mdp_act: state has wrong number of users");
  if (t < 0 || t >= table.horizon) throw VumacError("mdp_act: slot out of range");

  const int nb = static_cast<int>(table.disc.battery_grid.size());
  const int nr = static_cast<int>(table.disc.bits_grid.size());
  const int nw = static_cast<int>(table.w_states.size());
  long long s = 0, stride = 1;
  std::vector<long long> strides(4 * static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) { strides[i] = stride; stride *= nb; }
  for (int i = 0; i < M; ++i) { strides[M + i] = stride; stride *= nr; }
  for (int i = 0; i < M; ++i) {
    strides[2 * M + i] = stride;
    stride *= static_cast<long long>(table.channel_support[i].size());
  }
  for (int i = 0; i < M; ++i) { strides[3 * M + i] = stride; stride *= nw; }

  for (int i = 0; i < M; ++i) {
    int b = floor_grid(table.disc.battery_grid, state.battery[i]);
    int r = floor_grid(table.disc.bits_grid, state.bits[i]);
    int h = find_grid(table.channel_support[i], state.gain[i]);
    int w = find_grid(table.w_states, state.weight[i], 1e-12);
    if (b < 0) throw VumacError("mdp_act: battery below grid");
    if (r < 0) throw VumacError("mdp_act: bits below grid");
    if (h < 0) throw VumacError("mdp_act: gain off the channel support");
    if (w < 0) throw VumacError("mdp_act: weight off the importance support");
    s += b * strides[i] + r * strides[M + i] + h * strides[2 * M + i] + w * strides[3 * M + i];
  }
  const std::uint8_t* act = table.action[t].data() + static_cast<std::size_t>(s) * 2 * M;
  Action out;
  out.power.resize(M);
  out.rate.resize(M);
  for (int i = 0; i < M; ++i) {
    out.power[i] = table.disc.power_grid[act[i]];
    out.rate[i] = table.disc.rate_grid[act[M + i]];
  }
  return out;
}

namespace {
void write_doubles(std::ofstream& out, const std::vector<double>& v) {
  auto n = static_cast<std::uint32_t>(v.size());
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * 8));
}
std::vector<double> read_doubles(std::ifstream& in) {
  std::uint32_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  if (!in || n > 100'000'000u) throw VumacError("corrupt table file");
  std::vector<double> v(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * 8));
  if (!in) throw VumacError("corrupt table file");
  return v;
}
constexpr char kMagic[8] = {'V', 'M', 'D', 'P', 'T', 'B', 'L', '1'};
}  // namespace

void save_mdp_table(const MdpTable& table, const std::string& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw VumacError("cannot open '" + file + "' for writing");
  out.write(kMagic, 8);
  std::uint32_t m = static_cast<std::uint32_t>(table.num_users),
                t = static_cast<std::uint32_t>(table.horizon);
  out.write(reinterpret_cast<const char*>(&m), 4);
  out.write(reinterpret_cast<const char*>(&t), 4);
  write_doubles(out, table.disc.battery_grid);
  write_doubles(out, table.disc.bits_grid);
  write_doubles(out, table.disc.power_grid);
  write_doubles(out, table.disc.rate_grid);
  write_doubles(out, table.w_states);
  for (const auto& cs : table.channel_support) write_doubles(out, cs);
  for (const auto& layer : table.value) write_doubles(out, layer);
  for (const auto& layer : table.action) {
    auto n = static_cast<std::uint32_t>(layer.size());
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(layer.data()), static_cast<std::streamsize>(n));
  }
  if (!out) throw VumacError("write failed for '" + file + "'");
}

MdpTable load_mdp_table(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw VumacError("cannot open '" + file + "'");
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw VumacError("'" + file + "' is not a policy table file");
  std::uint32_t m = 0, t = 0;
  in.read(reinterpret_cast<char*>(&m), 4);
  in.read(reinterpret_cast<char*>(&t), 4);
  if (!in || m == 0 || m > 16 || t == 0 || t > 100'000)
    throw VumacError("corrupt table header");
  MdpTable tab;
  tab.num_users = static_cast<int>(m);
  tab.horizon = static_cast<int>(t);
  tab.disc.battery_grid = read_doubles(in);
  tab.disc.bits_grid = read_doubles(in);
  tab.disc.power_grid = read_doubles(in);
  tab.disc.rate_grid = read_doubles(in);
  tab.w_states = read_doubles(in);
  tab.channel_support.resize(m);
  for (auto& cs : tab.channel_support) cs = read_doubles(in);
  long long n = 1;
  for (std::uint32_t i = 0; i < m; ++i) n *= static_cast<long long>(tab.disc.battery_grid.size());
  for (std::uint32_t i = 0; i < m; ++i) n *= static_cast<long long>(tab.disc.bits_grid.size());
  for (std::uint32_t i = 0; i < m; ++i) n *= static_cast<long long>(tab.channel_support[i].size());
  for (std::uint32_t i = 0; i < m; ++i) n *= static_cast<long long>(tab.w_states.size());
  tab.value.resize(t);
  for (auto& layer : tab.value) {
    layer = read_doubles(in);
    if (static_cast<long long>(layer.size()) != n) throw VumacError("corrupt value layer");
  }
  tab.action.resize(t);
  for (auto& layer : tab.action) {
    std::uint32_t sz = 0;
    in.read(reinterpret_cast<char*>(&sz), 4);
    if (!in || static_cast<long long>(sz) != n * 2 * m) throw VumacError("corrupt action layer");
    layer.resize(sz);
    in.read(reinterpret_cast<char*>(layer.data()), static_cast<std::streamsize>(sz));
    if (!in) throw VumacError("corrupt action layer");
  }
  return tab;
}

}  // namespace vumac
