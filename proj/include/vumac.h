#ifndef VUMAC_H
#define VUMAC_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Importance-aware version-update scheduling over a fading multiple-access
 * channel: simulation, policy synthesis and evaluation.
 *
 * All functions return VUMAC_OK on success; on failure they return a status
 * code and leave a human-readable message in vumac_last_error() (thread
 * local). Handles are opaque and must be released with the matching _free.
 */

typedef enum {
  VUMAC_OK = 0,
  VUMAC_ERR_IO = 1,       /* file missing/unreadable/unwritable */
  VUMAC_ERR_PARSE = 2,    /* malformed config or artifact */
  VUMAC_ERR_INVALID = 3,  /* arguments inconsistent with the model */
  VUMAC_ERR_SOLVER = 4,   /* numerical solve failed to converge */
  VUMAC_ERR_INTERNAL = 5
} vumac_status;

typedef struct vumac_config vumac_config;
typedef struct vumac_policy vumac_policy;

const char* vumac_version(void);
const char* vumac_last_error(void);

/* Problem description (INI file; every key has a documented default). */
vumac_status vumac_config_load(const char* path, vumac_config** out);
void vumac_config_free(vumac_config* cfg);

/* Solve the finite-horizon dynamic program on the configured grids and write
 * the value/action table artifact. */
vumac_status vumac_mdp_solve(const vumac_config* cfg, const char* table_path);

/* Sample paths, solve the per-path convex program, write the imitation
 * dataset CSV. */
vumac_status vumac_offline_dataset(const vumac_config* cfg, int num_paths, uint64_t seed,
                                   const char* csv_path);

/* Train the imitation network on a dataset CSV and write the model file. */
vumac_status vumac_nn_train(const vumac_config* cfg, const char* dataset_csv, uint64_t seed,
                            const char* model_path);

/* kind: "greedy" | "offline" | "mdp" | "nn". The mdp/nn kinds need the
 * artifact produced by vumac_mdp_solve / vumac_nn_train; pass NULL for the
 * others. */
vumac_status vumac_policy_open(const vumac_config* cfg, const char* kind,
                               const char* artifact_path, vumac_policy** out);
void vumac_policy_free(vumac_policy* policy);

/* Monte Carlo evaluation of the weighted-distortion objective. */
vumac_status vumac_simulate(const vumac_config* cfg, vumac_policy* policy, int episodes,
                            uint64_t seed, double* mean, double* stderr_out);

/* Run the configured sweep end to end and write the results CSV. Pass
 * episodes_override <= 0 to keep the configured episode count; verbose != 0
 * logs progress to stderr. */
vumac_status vumac_experiment_run(const vumac_config* cfg, const char* csv_path,
                                  int episodes_override, int verbose);

#ifdef __cplusplus
}
#endif

#endif /* VUMAC_H */
