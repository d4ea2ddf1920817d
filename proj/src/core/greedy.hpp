#pragma once
#include "core/types.hpp"

namespace vumac {

// Myopic policy: every user spends its whole battery (the rate region only
// grows with received power and the current slot's cost only falls), then the
// slot cost sum_i w_i f(r_i - rho_i) is minimized over the rate region
// intersected with rho_i <= r_i. Users with w_i = 0 or r_i = 0 or an empty
// rate cap are fixed at rho_i = 0; the rest go through the interior-point
// solver.
Action greedy_act(const SystemState& state, const SystemParams& params, double ktol = 1e-8);

}  // namespace vumac
