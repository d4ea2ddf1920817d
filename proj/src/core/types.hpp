#pragma once
#include <cstdint>
#include <vector>

#include "core/scalar_fn.hpp"

namespace vumac {

// Absolute feasibility tolerance used everywhere a constraint is audited.
inline constexpr double kFeasTol = 1e-9;
// Probability vectors must sum to one within this.
inline constexpr double kProbTol = 1e-12;

struct DiscreteDist {
  std::vector<double> support;
  std::vector<double> probs;

  void validate(const char* what) const;
  // Inverse-CDF draw from a uniform u in [0,1); deterministic across platforms.
  double sample(double u) const;
};

struct SystemParams {
  int num_users = 0;           // M
  int horizon = 0;             // T slots, indexed t = 0..T-1
  double r_max = 0.0;          // bits per version update
  double b_max = 0.0;          // battery capacity
  ScalarFn cost_fn;            // f: distortion of x remaining bits
  ScalarFn rate_fn;            // g: rate cap of received power x

  void validate() const;
};

// Per-user arrival/energy/channel statistics plus the shared importance draw.
// All processes are i.i.d. across slots and independent across users.
struct StochasticModel {
  std::vector<DiscreteDist> energy;    // per user
  std::vector<DiscreteDist> channel;   // per user, support must be > 0
  std::vector<double> arrival_prob;    // per user, Bernoulli
  DiscreteDist weight;                 // importance of a fresh version

  void validate(const SystemParams& params) const;
};

struct SystemState {
  std::vector<double> battery;  // B_i(t), after this slot's harvest
  std::vector<double> bits;     // r_i(t), remaining bits of current version
  std::vector<double> gain;     // h_i(t)
  std::vector<double> weight;   // w_i(t), 0 until the first version arrives
};

struct Action {
  std::vector<double> power;  // P_i(t)
  std::vector<double> rate;   // rho_i(t)
};

// One realized sample path of all exogenous processes, [t][i] layout.
struct SamplePath {
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> energy;
  std::vector<std::vector<double>> gain;
  std::vector<std::vector<int>> arrival;       // 0/1
  std::vector<std::vector<double>> weight_draw;  // W(t), applied only on arrival
};

}  // namespace vumac
