#include "core/sampling.hpp"

namespace vumac {

SamplePath sample_path(const StochasticModel& model, const SystemParams& params,
                       std::uint64_t seed) {
  const int T = params.horizon;
  const int M = params.num_users;
  Rng rng(seed);
  SamplePath path;
  path.seed = seed;
  path.energy.assign(T, std::vector<double>(M));
  path.gain.assign(T, std::vector<double>(M));
  path.arrival.assign(T, std::vector<int>(M));
  path.weight_draw.assign(T, std::vector<double>(M));
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < M; ++i) {
      path.energy[t][i] = model.energy[i].sample(rng.uniform01());
      path.gain[t][i] = model.channel[i].sample(rng.uniform01());
      path.arrival[t][i] = rng.uniform01() < model.arrival_prob[i] ? 1 : 0;
      path.weight_draw[t][i] = model.weight.sample(rng.uniform01());
    }
  }
  return path;
}

}  // namespace vumac
