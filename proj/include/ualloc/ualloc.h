/* SPDX-License-Identifier: Apache-2.0 */
/*
 * C interface to the ualloc simulator.
 *
 * Every function returns a ua_status; UA_OK is zero. On failure a
 * human-readable message is available from ua_last_error() on the calling
 * thread until the next call into the library. Handles are opaque and owned
 * by the caller; release them with the matching *_free function. Strings
 * returned through char** out-parameters are released with ua_string_free.
 */
#ifndef UALLOC_UALLOC_H
#define UALLOC_UALLOC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(UALLOC_BUILDING_LIBRARY)
#    define UA_API __declspec(dllexport)
#  else
#    define UA_API __declspec(dllimport)
#  endif
#else
#  define UA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ua_status {
    UA_OK = 0,
    UA_ERR_INVALID_ARGUMENT = 1,
    UA_ERR_DIMENSION = 2,
    UA_ERR_INDETERMINATE = 3,
    UA_ERR_NO_ROOT = 4,
    UA_ERR_INFEASIBLE = 5,
    UA_ERR_NON_MONOTONE = 6,
    UA_ERR_CONFIG = 7,
    UA_ERR_DIVERGENCE = 8,
    UA_ERR_IO = 9,
    UA_ERR_EXPERIMENT_FAILED = 10,
    UA_ERR_INTERNAL = 99
} ua_status;

/* Artifacts written by ua_run_experiment. */
enum {
    UA_EMIT_TRACE = 1u << 0,
    UA_EMIT_SNAPSHOTS = 1u << 1,
    UA_EMIT_ORACLE = 1u << 2
};

typedef struct ua_config ua_config;
typedef struct ua_sim ua_sim;

UA_API const char* ua_version(void);
UA_API const char* ua_status_string(ua_status status);
UA_API const char* ua_last_error(void);
UA_API void ua_string_free(char* str);

/* ---- configuration ---------------------------------------------------- */

/* Known names: "ev-charging", "single-resource-theorem2". */
UA_API ua_status ua_config_from_preset(const char* name, ua_config** out);
UA_API ua_status ua_config_from_file(const char* path, ua_config** out);
UA_API ua_status ua_config_from_json(const char* json_text, ua_config** out);
UA_API void ua_config_free(ua_config* config);

UA_API ua_status ua_config_to_json(const ua_config* config, char** out_json);
UA_API ua_status ua_config_dims(const ua_config* config, size_t* n, size_t* m);

/* Overrides; applied on top of whatever the preset or file set. */
UA_API ua_status ua_config_set_seed(ua_config* config, uint64_t seed);
UA_API ua_status ua_config_set_steps(ua_config* config, uint64_t steps);
UA_API ua_status ua_config_set_constant_omega(ua_config* config, int enabled);
UA_API ua_status ua_config_set_snapshot_every(ua_config* config, uint64_t every);
UA_API ua_status ua_config_set_threads(ua_config* config, unsigned threads);
/* count must equal m; each value in (0, 1]. */
UA_API ua_status ua_config_set_gamma(ua_config* config, const double* gamma, size_t count);

/* ---- experiments -------------------------------------------------------- */

/*
 * Runs the configured simulation and writes artifacts (trace.csv,
 * snapshots.csv, oracle.json, summary.json) under out_dir. `source` is echoed
 * in the summary and may be NULL. If out_summary is non-NULL it receives the
 * summary document. A run whose engine or oracle failed still writes its
 * summary and returns UA_ERR_EXPERIMENT_FAILED.
 */
UA_API ua_status ua_run_experiment(const ua_config* config, const char* source, const char* out_dir,
                                   unsigned emit_flags, char** out_summary);

/* ---- step-by-step simulation ------------------------------------------- */

UA_API ua_status ua_sim_create(const ua_config* config, ua_sim** out);
UA_API void ua_sim_free(ua_sim* sim);
UA_API ua_status ua_sim_advance(ua_sim* sim, uint64_t steps);
UA_API ua_status ua_sim_step(const ua_sim* sim, uint64_t* out_step);
/* Arrays of length m. Only aggregates are exposed; per-agent state is not. */
UA_API ua_status ua_sim_omega(const ua_sim* sim, double* out, size_t m);
UA_API ua_status ua_sim_totals(const ua_sim* sim, uint64_t* out, size_t m);
UA_API ua_status ua_sim_sum_y(const ua_sim* sim, double* out, size_t m);

/* ---- analytics ---------------------------------------------------------- */

UA_API ua_status ua_overhead_bits(uint64_t mu_bits_per_float, uint64_t m, uint64_t* out_bits);
UA_API ua_status ua_co2_of_session(double power_kw, double hours, double emission_rate, double* out_kg);

#ifdef __cplusplus
}
#endif

#endif /* UALLOC_UALLOC_H */
