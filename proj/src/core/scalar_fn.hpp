#pragma once
#include <functional>
#include <string>

namespace vumac {

// Smooth scalar function bundle used for the per-user distortion cost and the
// multiple-access rate cap. Both are pluggable by name; solvers only touch
// f/df/ddf so any smooth convex (resp. concave) choice drops in.
struct ScalarFn {
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::function<double(double)> ddf;
};

// "exp-distortion": f(x) = exp(x - r_max); convex, increasing, f(r_max) = 1.
ScalarFn make_cost_fn(const std::string& name, double r_max);

// "log-rate": g(x) = ln(1 + x); concave, increasing, g(0) = 0.
ScalarFn make_rate_fn(const std::string& name);

// Validation probes used by config loading: sample the function on [0, hi]
// and reject non-monotone / wrong-curvature choices early.
bool is_nondecreasing_on(const ScalarFn& fn, double lo, double hi, int samples);
bool is_midpoint_convex_on(const ScalarFn& fn, double lo, double hi, int samples);
bool is_midpoint_concave_on(const ScalarFn& fn, double lo, double hi, int samples);

}  // namespace vumac
