#include "core/types.hpp"

#include <cmath>
#include <string>

#include "core/util.hpp"

namespace vumac {

void DiscreteDist::validate(const char* what) const {
  if (support.empty() || support.size() != probs.size())
    throw VumacError(std::string(what) + ": support/probs size mismatch or empty");
  double sum = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (!(probs[k] >= 0.0))
      throw VumacError(std::string(what) + ": negative probability");
    if (!std::isfinite(support[k]))
      throw VumacError(std::string(what) + ": non-finite support point");
    if (k > 0 && !(support[k] > support[k - 1]))
      throw VumacError(std::string(what) + ": support must be strictly increasing");
    sum += probs[k];
  }
  if (std::abs(sum - 1.0) > kProbTol)
    throw VumacError(std::string(what) + ": probabilities sum to " + std::to_string(sum));
}

double DiscreteDist::sample(double u) const {
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return support[k];
  }
  return support.back();
}

void SystemParams::validate() const {
  if (num_users < 1) throw VumacError("num_users must be >= 1");
  if (horizon < 1) throw VumacError("horizon must be >= 1");
  if (!(r_max > 0.0)) throw VumacError("r_max must be > 0");
  if (!(b_max > 0.0)) throw VumacError("b_max must be > 0");
  if (!cost_fn.f || !rate_fn.f) throw VumacError("cost_fn/rate_fn not set");
  if (!is_nondecreasing_on(cost_fn, 0.0, r_max, 64))
    throw VumacError("cost_fn must be non-decreasing on [0, r_max]");
  if (!is_midpoint_convex_on(cost_fn, 0.0, r_max, 64))
    throw VumacError("cost_fn must be convex on [0, r_max]");
  if (!is_nondecreasing_on(rate_fn, 0.0, b_max, 64))
    throw VumacError("rate_fn must be non-decreasing on [0, b_max]");
  if (!is_midpoint_concave_on(rate_fn, 0.0, b_max, 64))
    throw VumacError("rate_fn must be concave on [0, b_max]");
  if (std::abs(rate_fn.f(0.0)) > 1e-15) throw VumacError("rate_fn must satisfy g(0) = 0");
}

void StochasticModel::validate(const SystemParams& params) const {
  auto m = static_cast<std::size_t>(params.num_users);
  if (energy.size() != m || channel.size() != m || arrival_prob.size() != m)
    throw VumacError("stochastic model arrays must have one entry per user");
  for (std::size_t i = 0; i < m; ++i) {
    energy[i].validate("energy dist");
    channel[i].validate("channel dist");
    for (double h : channel[i].support)
      if (!(h > 0.0)) throw VumacError("channel gains must be > 0");
    for (double e : energy[i].support)
      if (e < 0.0) throw VumacError("energy arrivals must be >= 0");
    if (arrival_prob[i] < 0.0 || arrival_prob[i] > 1.0)
      throw VumacError("arrival_prob must lie in [0, 1]");
  }
  weight.validate("weight dist");
  for (double w : weight.support)
    if (w < 0.0) throw VumacError("importance weights must be >= 0");
}

}  // namespace vumac
