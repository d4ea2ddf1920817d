#include "core/rate_region.hpp"

#include <limits>

#include "core/util.hpp"

namespace vumac {

static void check_m(std::size_t m) {
  if (m == 0 || m > kMaxRateRegionUsers)
    throw VumacError("rate region supports 1.." + std::to_string(kMaxRateRegionUsers) + " users");
}

bool is_rate_feasible(const ScalarFn& g, const std::vector<double>& gain,
                      const std::vector<double>& power, const std::vector<double>& rate,
                      double tol) {
  std::size_t m = rate.size();
  check_m(m);
  for (double r : rate)
    if (r < -tol) return false;
  for (unsigned mask = 1; mask < (1u << m); ++mask) {
    double rho_sum = 0.0, recv = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      if (mask & (1u << i)) {
        rho_sum += rate[i];
        recv += gain[i] * power[i];
      }
    if (rho_sum > g.f(recv) + tol) return false;
  }
  return true;
}

double max_feasible_scaling(const ScalarFn& g, const std::vector<double>& gain,
                            const std::vector<double>& power, const std::vector<double>& rate) {
  std::size_t m = rate.size();
  check_m(m);
  double alpha = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << m); ++mask) {
    double rho_sum = 0.0, recv = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      if (mask & (1u << i)) {
        rho_sum += rate[i];
        recv += gain[i] * power[i];
      }
    if (rho_sum <= 0.0) continue;
    double cap = g.f(recv);
    alpha = std::min(alpha, cap > 0.0 ? cap / rho_sum : 0.0);
  }
  return alpha;  // +inf when every subset has zero requested rate
}

}  // namespace vumac
