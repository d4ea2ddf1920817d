// vumac CLI: thin shell over the shared-library C API. Every subcommand maps
// to one API call; failures print a single machine-parsable line on stderr.
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "vumac.h"

namespace {

struct ConfigHandle {
  vumac_config* ptr = nullptr;
  ~ConfigHandle() { vumac_config_free(ptr); }
};

struct PolicyHandle {
  vumac_policy* ptr = nullptr;
  ~PolicyHandle() { vumac_policy_free(ptr); }
};

int fail(const char* op, vumac_status st) {
  std::fprintf(stderr, "error: %s: status=%d: %s\n", op, static_cast<int>(st),
               vumac_last_error());
  return static_cast<int>(st);
}

int load_config(const std::string& path, ConfigHandle& cfg) {
  vumac_status st = vumac_config_load(path.c_str(), &cfg.ptr);
  if (st != VUMAC_OK) return fail("config-load", st);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"version-update scheduling over a fading multiple-access channel"};
  app.set_version_flag("--version", std::string(vumac_version()));
  app.require_subcommand(1);

  std::string config_path = "configs/default.ini";
  std::string out_path, data_path, policy_kind, artifact_path;
  std::uint64_t seed = 1;
  int episodes = 0;  // 0 = use the configured count
  int num_paths = 0;
  bool verbose = false;

  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("-c,--config", config_path, "problem description (INI)")
        ->capture_default_str();
  };

  auto* solve = app.add_subcommand("solve-mdp", "solve the dynamic program, write the table");
  add_config(solve);
  solve->add_option("-o,--out", out_path, "output table file")->required();

  auto* gen = app.add_subcommand("gen-offline", "build the imitation dataset CSV");
  add_config(gen);
  gen->add_option("-o,--out", out_path, "output CSV")->required();
  gen->add_option("-n,--paths", num_paths, "sample paths (0 = configured count)");
  gen->add_option("-s,--seed", seed, "base RNG seed")->capture_default_str();

  auto* train = app.add_subcommand("train-nn", "train the imitation network");
  add_config(train);
  train->add_option("-d,--data", data_path, "dataset CSV from gen-offline")->required();
  train->add_option("-o,--out", out_path, "output model file")->required();
  train->add_option("-s,--seed", seed, "training seed")->capture_default_str();

  auto* sim = app.add_subcommand("simulate", "Monte Carlo evaluation of one policy");
  add_config(sim);
  sim->add_option("-p,--policy", policy_kind, "greedy | offline | mdp | nn")->required();
  sim->add_option("-a,--artifact", artifact_path, "table/model file for mdp/nn");
  sim->add_option("-e,--episodes", episodes, "episodes (0 = configured count)");
  sim->add_option("-s,--seed", seed, "base RNG seed")->capture_default_str();

  auto* exp = app.add_subcommand("experiment", "run the configured sweep, write results CSV");
  add_config(exp);
  exp->add_option("-o,--out", out_path, "output CSV")->required();
  exp->add_option("-e,--episodes", episodes, "episodes override (0 = configured count)");
  exp->add_flag("-v,--verbose", verbose, "progress on stderr");

  CLI11_PARSE(app, argc, argv);

  ConfigHandle cfg;
  if (int rc = load_config(config_path, cfg)) return rc;

  if (solve->parsed()) {
    vumac_status st = vumac_mdp_solve(cfg.ptr, out_path.c_str());
    if (st != VUMAC_OK) return fail("solve-mdp", st);
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
  }
  if (gen->parsed()) {
    vumac_status st = vumac_offline_dataset(cfg.ptr, num_paths, seed, out_path.c_str());
    if (st != VUMAC_OK) return fail("gen-offline", st);
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
  }
  if (train->parsed()) {
    vumac_status st = vumac_nn_train(cfg.ptr, data_path.c_str(), seed, out_path.c_str());
    if (st != VUMAC_OK) return fail("train-nn", st);
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
  }
  if (sim->parsed()) {
    PolicyHandle pol;
    vumac_status st = vumac_policy_open(
        cfg.ptr, policy_kind.c_str(), artifact_path.empty() ? nullptr : artifact_path.c_str(),
        &pol.ptr);
    if (st != VUMAC_OK) return fail("policy-open", st);
    double mean = 0.0, se = 0.0;
    st = vumac_simulate(cfg.ptr, pol.ptr, episodes, seed, &mean, &se);
    if (st != VUMAC_OK) return fail("simulate", st);
    std::printf("policy=%s mean_cost=%.10g stderr=%.10g\n", policy_kind.c_str(), mean, se);
    return 0;
  }
  if (exp->parsed()) {
    vumac_status st = vumac_experiment_run(cfg.ptr, out_path.c_str(), episodes, verbose ? 1 : 0);
    if (st != VUMAC_OK) return fail("experiment", st);
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
  }
  return 1;
}
