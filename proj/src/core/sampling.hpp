#pragma once
#include <cstdint>
#include <random>

#include "core/types.hpp"

namespace vumac {

// mt19937_64 with a fixed 53-bit uniform so draws are identical across
// standard libraries (distribution classes are not portable).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform01() { return (gen_() >> 11) * 0x1.0p-53; }
  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

// Draw order is fixed (per slot, per user: energy, gain, arrival, weight) and
// the weight is drawn even without an arrival, so paths with the same seed
// stay aligned when only one process' distribution changes (common random
// numbers across sweep points).
SamplePath sample_path(const StochasticModel& model, const SystemParams& params,
                       std::uint64_t seed);

}  // namespace vumac
