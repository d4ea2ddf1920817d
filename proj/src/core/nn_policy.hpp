#pragma once
#include "core/mlp.hpp"
#include "core/types.hpp"

namespace vumac {

// Imitation policy: the network proposes (P, rho) from the state vector
// [B, r, h, w]; the proposal is repaired onto the feasible set by clipping
// P into [0, B_i], clipping rho into [0, min(r_i, g(h_i P_i))] and, if any
// subset cap is still exceeded, scaling the whole rho vector down uniformly.
Action nn_act(const SystemState& state, const MlpModel& model, const SystemParams& params);

}  // namespace vumac
