#pragma once
#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace vumac {

// Fully connected ReLU network with a linear output layer and built-in input
// standardization (z-score with train-set statistics).
struct MlpModel {
  std::vector<int> sizes;  // input, hidden..., output
  std::vector<Eigen::MatrixXd> W;  // W[l]: sizes[l+1] x sizes[l]
  std::vector<Eigen::VectorXd> b;
  Eigen::VectorXd norm_mean, norm_scale;

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
};

struct TrainConfig {
  std::vector<int> hidden = {64, 64};
  double learning_rate = 1e-3;
  double momentum = 0.9;
  int batch_size = 64;
  int max_epochs = 200;
  int patience = 20;          // epochs without val improvement before stopping
  double val_fraction = 0.1;  // held-out fraction, split by group
};

struct TrainHistory {
  std::vector<double> train_mse, val_mse;
  int best_epoch = -1;
  double best_val = 0.0;
};

struct TrainResult {
  MlpModel model;
  TrainHistory history;
};

// Supervised least-squares fit. `group` assigns each row to a sample path;
// the validation split keeps whole groups together so no path leaks across
// the split. The returned model carries the best-validation weights.
TrainResult train_mlp(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                      const std::vector<std::uint64_t>& group, const TrainConfig& cfg,
                      std::uint64_t seed);

// Max relative error between analytic and central-difference gradients at
// (x, y), over all weights and biases.
double gradient_check(const MlpModel& model, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                      double eps = 1e-6);

void save_mlp(const MlpModel& model, const std::string& file);
MlpModel load_mlp(const std::string& file);

}  // namespace vumac
