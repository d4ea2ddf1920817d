#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "core/types.hpp"

namespace vumac {

// State/action grids shared by all users. Closure under the dynamics and the
// exogenous supports is validated before any recursion runs.
struct DiscretizationSpec {
  std::vector<double> battery_grid;  // must contain 0 and b_max
  std::vector<double> bits_grid;     // must contain 0 and r_max
  std::vector<double> power_grid;
  std::vector<double> rate_grid;     // transmitted bits per slot
};

// Throws VumacError naming the offending combination if some reachable
// (state, action, draw) leaves the grid.
void check_grid_closure(const SystemParams& params, const StochasticModel& model,
                        const DiscretizationSpec& disc);

struct GridAction {
  std::vector<int> p;    // power grid indices, one per user
  std::vector<int> rho;  // rate grid indices, one per user
};

// Solved finite-horizon table: value[t][s] and the greedy-optimal action
// action[t][s * 2M + k] (power indices first, then rate indices).
struct MdpTable {
  int num_users = 0;
  int horizon = 0;
  DiscretizationSpec disc;
  std::vector<double> w_states;                       // {0} union weight support
  std::vector<std::vector<double>> channel_support;   // per user
  std::vector<std::vector<double>> value;
  std::vector<std::vector<std::uint8_t>> action;
  std::uint64_t action_evaluations = 0;
};

class MdpSolver {
 public:
  MdpSolver(const SystemParams& params, const StochasticModel& model,
            const DiscretizationSpec& disc);

  // Backward recursion over the full horizon. With monotone=true the sweep
  // is restricted to power-minimal actions within each fixed rate vector
  // (value monotonicity in the battery makes the rest non-winners, and the
  // dominator is lexicographically smaller, so values and argmins are
  // reproduced bit-for-bit); a guard falls back to full enumeration whenever
  // the reduced minimum exceeds the value at the smaller-battery neighbour,
  // which full-sweep optimality forbids.
  MdpTable solve(bool monotone) const;

  // Expected cost-to-go of one (state, action) pair against an explicit
  // next-slot value layer; the summation order matches solve() exactly.
  double transition_expectation(const std::vector<int>& b_idx, const std::vector<int>& r_idx,
                                const std::vector<int>& h_idx, const std::vector<int>& w_idx,
                                const std::vector<int>& p_idx, const std::vector<int>& rho_idx,
                                const std::vector<double>& v_next) const;

  double stage_cost_at(const std::vector<int>& r_idx, const std::vector<int>& w_idx,
                       const std::vector<int>& rho_idx) const;

  // All grid actions satisfying energy, bit and rate-region feasibility.
  std::vector<GridAction> enumerate_feasible_actions(const std::vector<int>& b_idx,
                                                     const std::vector<int>& r_idx,
                                                     const std::vector<int>& h_idx) const;

  int num_states() const { return n_states_; }
  const std::vector<double>& w_states() const { return w_states_; }
  int state_index(const std::vector<int>& b_idx, const std::vector<int>& r_idx,
                  const std::vector<int>& h_idx, const std::vector<int>& w_idx) const;
  void state_digits(int s, std::vector<int>& b_idx, std::vector<int>& r_idx,
                    std::vector<int>& h_idx, std::vector<int>& w_idx) const;

 private:
  struct ActionList {
    std::vector<std::uint8_t> flat;  // 2M entries per action: p digits, rho digits
    std::vector<std::int32_t> minimal;  // indices of same-rho power-minimal actions
    int count = 0;
  };

  void build_tables();
  void build_joint_combos();
  double u_entry(const std::vector<double>& v_next, const std::vector<int>& d_idx,
                 const std::vector<int>& q_idx, const std::vector<int>& w_idx) const;

  SystemParams params_;
  StochasticModel model_;
  DiscretizationSpec disc_;
  int M_, T_;
  int nb_, nr_, np_, nrho_, nw_;
  std::vector<int> nh_;                 // per user
  std::vector<double> w_states_;
  std::vector<long long> stride_b_, stride_r_, stride_h_, stride_w_;
  int n_states_ = 0;
  int n_brh_ = 0;  // states per weight block; action cache key

  std::vector<std::vector<double>> f_tab_;   // [r][rho] stage f(r - rho)
  std::vector<double> d_grid_;               // unique battery residuals b - p
  std::vector<std::vector<int>> dpair_;      // [b][p] -> d index, -1 infeasible
  std::vector<std::vector<int>> qpair_;      // [r][rho] -> bits index, -1 infeasible
  std::vector<std::vector<std::vector<int>>> next_b_;  // [user][d][e_idx] -> battery index
  int rmax_idx_ = 0;
  std::vector<int> wdraw_state_;             // weight support index -> w_states index

  // Joint exogenous draw table, user 0 outermost.
  std::vector<double> jprob_;
  std::vector<std::uint8_t> je_, ja_, jwd_, jh_;  // [j * M + i]
  int n_joint_ = 0;

  std::vector<long long> ustride_d_, ustride_q_, ustride_w_;
  long long n_u_ = 0;

  std::vector<ActionList> act_cache_;  // indexed by s % n_brh_
};

MdpTable solve_mdp(const SystemParams& params, const StochasticModel& model,
                   const DiscretizationSpec& disc, bool monotone = true);

// Greedy table lookup: batteries and bits floor-snap to the grid (safe side),
// gains and weights must sit on their supports exactly.
Action mdp_act(const MdpTable& table, const SystemState& state, int t);

void save_mdp_table(const MdpTable& table, const std::string& file);
MdpTable load_mdp_table(const std::string& file);

}  // namespace vumac
