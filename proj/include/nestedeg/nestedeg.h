/* C interface to the nested EG forecasting library.
 *
 * Every function returns a neg_status. On failure neg_last_error() returns a
 * message for the calling thread. Strings returned through char** are owned
 * by the caller and released with neg_string_free. JSON arguments use the
 * same schemas as the command-line tool.
 */
#ifndef NESTEDEG_H
#define NESTEDEG_H

#include <stddef.h>
#include <stdint.h>

#if defined(NEG_BUILDING_LIBRARY)
#define NEG_API __attribute__((visibility("default")))
#else
#define NEG_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum neg_status {
  NEG_OK = 0,
  NEG_ERR_INVALID_ARGUMENT = 1, /* malformed input or out-of-domain value */
  NEG_ERR_CONTRACT = 2,         /* API misuse, e.g. update without predict */
  NEG_ERR_UNSUPPORTED = 3,
  NEG_ERR_IO = 4,
  NEG_ERR_INTERNAL = 5
} neg_status;

NEG_API const char* neg_last_error(void);
NEG_API const char* neg_version(void);
NEG_API void neg_string_free(char* s);

/* loss_json: {"kind":"absolute"|"square"|"pinball","alpha":a} */
NEG_API neg_status neg_loss_eval(const char* loss_json, double prediction, double outcome, double* out);
NEG_API neg_status neg_loss_subgradient(const char* loss_json, double prediction, double outcome, double* out);

typedef struct neg_forecaster neg_forecaster;

/* kind is "eg", "tree" or "meta". dim is the covariate dimension for "tree"
 * and is ignored otherwise. config_json as for neg_run. */
NEG_API neg_status neg_forecaster_create(const char* config_json, const char* kind, size_t dim,
                                         neg_forecaster** out);
/* x has `dim` entries for tree forecasters; NULL with dim 0 otherwise. */
NEG_API neg_status neg_forecaster_predict(neg_forecaster* f, const double* x, size_t dim, double* out);
NEG_API neg_status neg_forecaster_update(neg_forecaster* f, double outcome);
/* Total nodes, height and completed steps (for meta: summed / max over experts). */
NEG_API neg_status neg_forecaster_stats(const neg_forecaster* f, size_t* nodes, uint32_t* height,
                                        uint64_t* steps);
/* Tree state as JSON. Unsupported for eg and meta forecasters. */
NEG_API neg_status neg_forecaster_snapshot(const neg_forecaster* f, char** json_out);
NEG_API neg_status neg_forecaster_restore(const char* snapshot_json, neg_forecaster** out);
NEG_API void neg_forecaster_destroy(neg_forecaster* f);

/* Writes a `t,y` CSV and its `<name>.meta.json` sidecar. loss_json selects the
 * loss for the recorded L* and may be NULL (absolute loss). */
NEG_API neg_status neg_simulate(const char* process_json, size_t length, uint64_t seed, const char* loss_json,
                                const char* out_csv);
NEG_API neg_status neg_lstar(const char* process_json, const char* loss_json, double* out);

/* request_json: {"kind":"constant"|"histogram"|"lipschitz","loss":{...},"bins":m^d,"L":x} */
NEG_API neg_status neg_oracle(const char* input_csv, const char* request_json, char** result_json);

/* config_json: {"loss":{...},"schedule":"powers_of_two"|"quadratic","effective_range":b,
 * "max_d":n,"forecaster":"eg"|"tree"|"meta","seed":s}. restore_path may be NULL. */
NEG_API neg_status neg_run(const char* config_json, const char* input_csv, const char* out_dir,
                           const char* restore_path);

/* Checks a run directory against its bounds. Oracle results are JSON strings
 * as produced by neg_oracle. *all_passed is set to 1 when every check holds. */
NEG_API neg_status neg_verify_bounds(const char* run_dir, const char* const* oracle_jsons, size_t n_oracles,
                                     const double* lipschitz, size_t n_lipschitz, char** report_json,
                                     int* all_passed);

NEG_API neg_status neg_report(const char* const* run_dirs, size_t n_runs, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif
