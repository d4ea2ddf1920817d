#pragma once
#include "core/types.hpp"

namespace vumac {

// Battery: drain then harvest then cap. Written as (b - p) + e so the same
// rounding happens whether or not the post-decision residual is precomputed.
inline double evolve_battery(double b, double p, double e, double b_max) {
  double d = b - p;
  double v = d + e;
  return v < b_max ? v : b_max;
}

// Remaining bits: a fresh version resets to r_max, otherwise transmit rho.
inline double evolve_bits(double r, double rho, int arrival, double r_max) {
  return arrival ? r_max : r - rho;
}

// Importance: frozen while the same version is pending, replaced on arrival.
inline double evolve_weight(double w, int arrival, double w_draw) {
  return arrival ? w_draw : w;
}

// Per-slot cost charged after the action: sum_i w_i * f(r_i - rho_i).
double stage_cost(const SystemState& s, const Action& a, const SystemParams& params);

// Action-vs-state audits (rate-region feasibility lives in rate_region.hpp).
bool is_energy_feasible(const SystemState& s, const Action& a, double tol = kFeasTol);
bool is_bit_feasible(const SystemState& s, const Action& a, double tol = kFeasTol);

// Pre-draw state: batteries, bits and weights all start at zero.
SystemState initial_state(const SystemParams& params);

Action zero_action(const SystemParams& params);

// Fold the current slot's action and the next slot's exogenous draws into s,
// producing the decision state for slot next_t. Bootstrapping slot 0 is the
// same call with a zero action on the all-zero initial state.
void advance_state(SystemState& s, const Action& a, const SamplePath& path, int next_t,
                   const SystemParams& params);

}  // namespace vumac
