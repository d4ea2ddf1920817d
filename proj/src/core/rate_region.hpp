#pragma once
#include <vector>

#include "core/types.hpp"

namespace vumac {

// Multiple-access rate region for one slot: rho is feasible iff for every
// nonempty subset S of users, sum_{i in S} rho_i <= g(sum_{i in S} h_i P_i).
// Subsets are enumerated as bitmasks; num_users is capped to keep 2^M sane.
inline constexpr int kMaxRateRegionUsers = 16;

bool is_rate_feasible(const ScalarFn& g, const std::vector<double>& gain,
                      const std::vector<double>& power, const std::vector<double>& rate,
                      double tol = kFeasTol);

// Largest alpha such that alpha * rho is feasible (0 if rho has a zero-cap
// user with positive rate; +inf never occurs since rho >= 0, alpha <= 1 when
// called on infeasible points but can exceed 1 on interior points).
double max_feasible_scaling(const ScalarFn& g, const std::vector<double>& gain,
                            const std::vector<double>& power, const std::vector<double>& rate);

inline double max_single_user_rate(const ScalarFn& g, double gain, double power) {
  return g.f(gain * power);
}

}  // namespace vumac
