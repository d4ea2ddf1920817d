#include "core/nn_policy.hpp"

#include <algorithm>
#include <cmath>

#include "core/rate_region.hpp"
#include "core/util.hpp"

namespace vumac {

Action nn_act(const SystemState& state, const MlpModel& model, const SystemParams& params) {
  const int M = params.num_users;
  if (model.sizes.front() != 4 * M || model.sizes.back() != 2 * M)
    throw VumacError("nn_act: model shape does not match the system size");
  Eigen::VectorXd x(4 * M);
  for (int i = 0; i < M; ++i) {
    x[i] = state.battery[i];
    x[M + i] = state.bits[i];
    x[2 * M + i] = state.gain[i];
    x[3 * M + i] = state.weight[i];
  }
  Eigen::VectorXd y = model.forward(x);

  Action act;
  act.power.resize(M);
  act.rate.resize(M);
  for (int i = 0; i < M; ++i) {
    act.power[i] = std::clamp(y[i], 0.0, state.battery[i]);
    double cap = std::min(state.bits[i],
                          max_single_user_rate(params.rate_fn, state.gain[i], act.power[i]));
    act.rate[i] = std::clamp(y[M + i], 0.0, cap);
  }
  double alpha =
      max_feasible_scaling(params.rate_fn, state.gain, act.power, act.rate);
  if (alpha < 1.0)
    for (int i = 0; i < M; ++i) act.rate[i] *= alpha;
  return act;
}

}  // namespace vumac
