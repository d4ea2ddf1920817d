#pragma once
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "core/mdp.hpp"
#include "core/mlp.hpp"
#include "core/offline.hpp"
#include "core/types.hpp"

namespace vumac {

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  // Called once per episode before the first action; non-causal policies
  // inspect the whole path here.
  virtual void begin_episode(const SamplePath& path) { (void)path; }
  virtual Action act(const SystemState& state, int t) = 0;
};

std::unique_ptr<Policy> make_greedy_policy(const SystemParams& params);
std::unique_ptr<Policy> make_mdp_policy(MdpTable table);
std::unique_ptr<Policy> make_nn_policy(MlpModel model, const SystemParams& params);
std::unique_ptr<Policy> make_offline_policy(const SystemParams& params, double ktol = 1e-8);

struct EpisodeResult {
  double objective = 0.0;  // (1/(T M)) sum of stage costs
  std::vector<double> slot_cost;
};

// Runs one episode, auditing every action against the energy, bit and
// rate-region constraints (tolerance 1e-9); violations throw
// "policy-infeasible-action ...".
EpisodeResult simulate_episode(Policy& policy, const SamplePath& path,
                               const SystemParams& params);

struct EvalResult {
  double mean = 0.0;
  double stderr_ = 0.0;
  int episodes = 0;
};

// Monte Carlo estimate over episodes; episode e uses the path seed
// derive_seed(seed, e), so different policies (and sweep points) see paired
// draws.
EvalResult evaluate_policy(Policy& policy, const StochasticModel& model,
                           const SystemParams& params, int episodes, std::uint64_t seed);

struct ExperimentSpec {
  std::string sweep_param;  // "version_prob", "energy_prob" or "arrival_prob"
  std::vector<double> sweep_values;
  std::vector<std::string> policies;  // of {"offline", "nn", "mdp", "greedy"}
  int episodes = 10000;
  std::uint64_t seed = 1;
  int offline_paths = 2000;  // imitation training corpus size
  double offline_ktol = 1e-8;
  TrainConfig train;
  DiscretizationSpec disc;
};

struct ExperimentRow {
  std::string sweep_param;
  double sweep_value = 0.0;
  std::string policy;
  double mean_cost = 0.0;
  double stderr_ = 0.0;
  int episodes = 0;
};

// Applies one sweep value to a copy of the base model.
StochasticModel apply_sweep(const StochasticModel& base, const std::string& param, double value);

// Full sweep: per value, solve the dynamic program, regenerate the imitation
// corpus and retrain, then evaluate all requested policies on paired paths.
// When "offline" is requested, every episode asserts the non-causal bound:
// offline objective <= online objective + 1e-6.
std::vector<ExperimentRow> run_experiment(const SystemParams& params,
                                          const StochasticModel& base_model,
                                          const ExperimentSpec& spec,
                                          const std::function<void(const std::string&)>& log = {});

void export_results(const std::vector<ExperimentRow>& rows, const std::string& file);

}  // namespace vumac
