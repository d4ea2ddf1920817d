#include "core/scalar_fn.hpp"

#include <cmath>

#include "core/util.hpp"

namespace vumac {

ScalarFn make_cost_fn(const std::string& name, double r_max) {
  if (name == "exp-distortion") {
    return ScalarFn{
        name,
        [r_max](double x) { return std::exp(x - r_max); },
        [r_max](double x) { return std::exp(x - r_max); },
        [r_max](double x) { return std::exp(x - r_max); },
    };
  }
  throw VumacError("unknown cost function '" + name + "'");
}

ScalarFn make_rate_fn(const std::string& name) {
  if (name == "log-rate") {
    return ScalarFn{
        name,
        [](double x) { return std::log1p(x); },
        [](double x) { return 1.0 / (1.0 + x); },
        [](double x) { return -1.0 / ((1.0 + x) * (1.0 + x)); },
    };
  }
  throw VumacError("unknown rate function '" + name + "'");
}

bool is_nondecreasing_on(const ScalarFn& fn, double lo, double hi, int samples) {
  double prev = fn.f(lo);
  for (int k = 1; k <= samples; ++k) {
    double x = lo + (hi - lo) * k / samples;
    double v = fn.f(x);
    if (v < prev - 1e-12) return false;
    prev = v;
  }
  return true;
}

static bool midpoint_sign_ok(const ScalarFn& fn, double lo, double hi, int samples, double sign) {
  for (int k = 0; k < samples; ++k) {
    double a = lo + (hi - lo) * k / samples;
    double b = lo + (hi - lo) * (k + 2 <= samples ? k + 2 : samples) / samples;
    if (b <= a) continue;
    double lhs = fn.f(0.5 * (a + b));
    double rhs = 0.5 * (fn.f(a) + fn.f(b));
    if (sign * (lhs - rhs) > 1e-12) return false;
  }
  return true;
}

bool is_midpoint_convex_on(const ScalarFn& fn, double lo, double hi, int samples) {
  return midpoint_sign_ok(fn, lo, hi, samples, +1.0);
}

bool is_midpoint_concave_on(const ScalarFn& fn, double lo, double hi, int samples) {
  return midpoint_sign_ok(fn, lo, hi, samples, -1.0);
}

}  // namespace vumac
