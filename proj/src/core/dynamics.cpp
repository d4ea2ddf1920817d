#include "core/dynamics.hpp"

namespace vumac {

double stage_cost(const SystemState& s, const Action& a, const SystemParams& params) {
  double c = 0.0;
  for (int i = 0; i < params.num_users; ++i)
    c += s.weight[i] * params.cost_fn.f(s.bits[i] - a.rate[i]);
  return c;
}

bool is_energy_feasible(const SystemState& s, const Action& a, double tol) {
  for (int i = 0; i < static_cast<int>(s.battery.size()); ++i)
    if (a.power[i] < -tol || a.power[i] > s.battery[i] + tol) return false;
  return true;
}

bool is_bit_feasible(const SystemState& s, const Action& a, double tol) {
  for (int i = 0; i < static_cast<int>(s.bits.size()); ++i)
    if (a.rate[i] < -tol || a.rate[i] > s.bits[i] + tol) return false;
  return true;
}

SystemState initial_state(const SystemParams& params) {
  auto m = static_cast<std::size_t>(params.num_users);
  return SystemState{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0),
                     std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};
}

Action zero_action(const SystemParams& params) {
  auto m = static_cast<std::size_t>(params.num_users);
  return Action{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};
}

void advance_state(SystemState& s, const Action& a, const SamplePath& path, int next_t,
                   const SystemParams& params) {
  for (int i = 0; i < params.num_users; ++i) {
    int arr = path.arrival[next_t][i];
    s.battery[i] = evolve_battery(s.battery[i], a.power[i], path.energy[next_t][i], params.b_max);
    s.bits[i] = evolve_bits(s.bits[i], a.rate[i], arr, params.r_max);
    s.weight[i] = evolve_weight(s.weight[i], arr, path.weight_draw[next_t][i]);
    s.gain[i] = path.gain[next_t][i];
  }
}

}  // namespace vumac
