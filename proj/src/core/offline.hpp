#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "core/convex_solver.hpp"
#include "core/types.hpp"

namespace vumac {

// Non-causal optimum for one realized path. Batteries follow the true capped
// recursion (the solver internally uses the value-preserving epigraph
// relaxation); bits/weights are the decision-state trajectories.
struct OfflineSolution {
  std::vector<std::vector<double>> power;    // [t][i]
  std::vector<std::vector<double>> rate;     // [t][i]
  std::vector<std::vector<double>> battery;  // [t][i]
  std::vector<std::vector<double>> bits;     // [t][i]
  std::vector<std::vector<double>> weight;   // [t][i]
  double objective = 0.0;  // (1 / (T M)) sum_{t,i} w_i(t) f(r_i(t) - rho_i(t))
  SolveReport report;
};

OfflineSolution solve_offline(const SamplePath& path, const SystemParams& params,
                              double ktol = 1e-8);

// Supervised imitation data: one row per (path, slot), states paired with the
// offline-optimal actions computed on that path.
struct TrainingDataset {
  int num_users = 0;
  Eigen::MatrixXd X;  // columns: B_1..B_M, r_1..r_M, h_1..h_M, w_1..w_M
  Eigen::MatrixXd Y;  // columns: P_1..P_M, rho_1..rho_M
  std::vector<std::uint64_t> path_seed;
  std::vector<int> slot;
};

TrainingDataset generate_dataset(const StochasticModel& model, const SystemParams& params,
                                 int num_paths, std::uint64_t seed);

void write_dataset_csv(const TrainingDataset& ds, const std::string& file);
TrainingDataset read_dataset_csv(const std::string& file);

}  // namespace vumac
