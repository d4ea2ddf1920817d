#include "vumac.h"

#include <cstdio>
#include <exception>
#include <string>

#include "core/config.hpp"
#include "core/mdp.hpp"
#include "core/offline.hpp"
#include "core/simulate.hpp"
#include "core/util.hpp"

using namespace vumac;

struct vumac_config {
  ProblemConfig cfg;
};

struct vumac_policy {
  std::unique_ptr<Policy> impl;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

// IO problems carry recognizable prefixes from the core; everything else
// falls back to the caller-provided default.
vumac_status classify(const std::string& msg, vumac_status fallback) {
  if (msg.rfind("cannot open", 0) == 0 || msg.find("write failed") != std::string::npos)
    return VUMAC_ERR_IO;
  if (msg.find("corrupt") != std::string::npos ||
      msg.find("is not a") != std::string::npos)
    return VUMAC_ERR_PARSE;
  return fallback;
}

template <typename Fn>
vumac_status guarded(vumac_status fallback, Fn&& fn) {
  try {
    fn();
    return VUMAC_OK;
  } catch (const VumacError& e) {
    set_error(e.what());
    return classify(e.what(), fallback);
  } catch (const std::exception& e) {
    set_error(e.what());
    return VUMAC_ERR_INTERNAL;
  } catch (...) {
    set_error("unknown error");
    return VUMAC_ERR_INTERNAL;
  }
}

}  // namespace

extern "C" {

const char* vumac_version(void) { return "1.0.0"; }

const char* vumac_last_error(void) { return g_last_error.c_str(); }

vumac_status vumac_config_load(const char* path, vumac_config** out) {
  if (!path || !out) {
    set_error("null argument");
    return VUMAC_ERR_INVALID;
  }
  *out = nullptr;
  return guarded(VUMAC_ERR_PARSE, [&] {
    auto* handle = new vumac_config{load_problem_config(path)};
    *out = handle;
  });
}

void vumac_config_free(vumac_config* cfg) { delete cfg; }

vumac_status vumac_mdp_solve(const vumac_config* cfg, const char* table_path) {
  if (!cfg || !table_path) {
    set_error("null argument");
    return VUMAC_ERR_INVALID;
  }
  return guarded(VUMAC_ERR_INVALID, [&] {
    MdpTable table =
        solve_mdp(cfg->cfg.params, cfg->cfg.model, cfg->cfg.experiment.disc, true);
    save_mdp_table(table, table_path);
  });
}

vumac_status vumac_offline_dataset(const vumac_config* cfg, int num_paths, uint64_t seed,
                                   const char* csv_path) {
  if (!cfg || !csv_path) {
    set_error("null argument");
    return VUMAC_ERR_INVALID;
  }
  return guarded(VUMAC_ERR_SOLVER, [&] {
    int n = num_paths > 0 ? num_paths : cfg->cfg.experiment.offline_paths;
    TrainingDataset ds = generate_dataset(cfg->cfg.model, cfg->cfg.params, n, seed);
    write_dataset_csv(ds, csv_path);
  });
}

vumac_status vumac_nn_train(const vumac_config* cfg, const char* dataset_csv, uint64_t seed,
                            const char* model_path) {
  if (!cfg || !dataset_csv || !model_path) {
    set_error("null argument");
    return VUMAC_ERR_INVALID;
  }
  return guarded(VUMAC_ERR_SOLVER, [&] {
    TrainingDataset ds = read_dataset_csv(dataset_csv);
    if (ds.num_users != cfg->cfg.params.num_users)
      throw VumacError("dataset user count does not match the config");
    TrainResult tr = train_mlp(ds.X, ds.Y, ds.path_seed, cfg->cfg.experiment.train, seed);
    save_mlp(tr.model, model_path);
  });
}

vumac_status vumac_policy_open(const vumac_config* cfg, const char* kind,
                               const char* artifact_path, vumac_policy** out) {
  if (!cfg || !kind || !out) {
    set_error("null argument");
    return VUMAC_ERR_INVALID;
  }
  *out = nullptr;
  return guarded(VUMAC_ERR_INVALID, [&] {
    std::string k = kind;
    std::unique_ptr<Policy> impl;
    if (k == "greedy") {
      impl = make_greedy_policy(cfg->cfg.params);
    } else if (k == "offline") {
      impl = make_offline_policy(cfg->cfg.params, cfg->cfg.experiment.offline_ktol);
    } else if (k == "mdp") {
      if (!artifact_path) throw VumacError("mdp policy needs a table artifact");
      MdpTable table = load_mdp_table(artifact_path);
      if (table.num_users != cfg->cfg.params.num_users ||
          table.horizon != cfg->cfg.params.horizon)
        throw VumacError("table artifact does not match the configured num_users/horizon");
      impl = make_mdp_policy(std::move(table));
    } else if (k == "nn") {
      if (!artifact_path) throw VumacError("nn policy needs a model artifact");
      MlpModel model = load_mlp(artifact_path);
      impl = make_nn_policy(std::move(model), cfg->cfg.params);
    } else {
      throw VumacError("unknown policy kind '" + k + "'");
    }
    *out = new vumac_policy{std::move(impl)};
  });
}

void vumac_policy_free(vumac_policy* policy) { delete policy; }

vumac_status vumac_simulate(const vumac_config* cfg, vumac_policy* policy, int episodes,
                            uint64_t seed, double* mean, double* stderr_out) {
  if (!cfg || !policy || !mean) {
    set_error("null argument");
    return VUMAC_ERR_INVALID;
  }
  return guarded(VUMAC_ERR_SOLVER, [&] {
    int n = episodes > 0 ? episodes : cfg->cfg.experiment.episodes;
    EvalResult res = evaluate_policy(*policy->impl, cfg->cfg.model, cfg->cfg.params,
                                     n, seed);
    *mean = res.mean;
    if (stderr_out) *stderr_out = res.stderr_;
  });
}

vumac_status vumac_experiment_run(const vumac_config* cfg, const char* csv_path,
                                  int episodes_override, int verbose) {
  if (!cfg || !csv_path) {
    set_error("null argument");
    return VUMAC_ERR_INVALID;
  }
  return guarded(VUMAC_ERR_SOLVER, [&] {
    ExperimentSpec spec = cfg->cfg.experiment;
    if (episodes_override > 0) spec.episodes = episodes_override;
    std::function<void(const std::string&)> log;
    if (verbose)
      log = [](const std::string& s) { std::fprintf(stderr, "%s\n", s.c_str()); };
    auto rows = run_experiment(cfg->cfg.params, cfg->cfg.model, spec, log);
    export_results(rows, csv_path);
  });
}

}  // extern "C"
