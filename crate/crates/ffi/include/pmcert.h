#ifndef PMCERT_H
#define PMCERT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PmcertStatus {
  PMCERT_STATUS_OK = 0,
  PMCERT_STATUS_NULL_POINTER = 1,
  PMCERT_STATUS_INVALID_ARGUMENT = 2,
  PMCERT_STATUS_PARSE = 3,
  PMCERT_STATUS_VALIDITY_EXCEEDED = 4,
  PMCERT_STATUS_DEGENERATE = 5,
  PMCERT_STATUS_PANIC = 6,
} PmcertStatus;

// Target scenario handle.
typedef struct PmcertScenario PmcertScenario;

// Statistics table handle.
typedef struct PmcertStats PmcertStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or null. Valid until
// the next failing call on the same thread.
const char *pmcert_last_error(void);

// # Safety
// `s` must be null or a string returned by this library.
void pmcert_string_free(char *s);

// Builds a catalog scenario. `alpha` is used by `"biased"` only.
//
// # Safety
// `name` must be a valid C string and `out` a writable pointer.
enum PmcertStatus pmcert_scenario_catalog(const char *name,
                                          double alpha,
                                          struct PmcertScenario **out);

// Parses a scenario file (`{"bloch": [...]}` or `{"kets": [...]}`).
//
// # Safety
// `json` must be a valid C string and `out` a writable pointer.
enum PmcertStatus pmcert_scenario_from_json(const char *json, struct PmcertScenario **out);

// # Safety
// `s` must be null or a handle from this library, not yet freed.
void pmcert_scenario_free(struct PmcertScenario *s);

// # Safety
// `s` must be a live handle; `n` and `d` writable.
enum PmcertStatus pmcert_scenario_shape(const struct PmcertScenario *s, size_t *n, size_t *d);

// # Safety
// `json` must be a valid C string and `out` a writable pointer.
enum PmcertStatus pmcert_stats_from_json(const char *json, struct PmcertStats **out);

// # Safety
// `t` must be a live handle and `out` writable.
enum PmcertStatus pmcert_stats_to_json(const struct PmcertStats *t, char **out);

// # Safety
// `t` must be null or a handle from this library, not yet freed.
void pmcert_stats_free(struct PmcertStats *t);

// Ideal statistics of the target.
//
// # Safety
// `s` must be a live handle and `out` writable.
enum PmcertStatus pmcert_born_table(const struct PmcertScenario *s, struct PmcertStats **out);

// Statistics of a seeded perturbation. `noise` is one of `unitary`,
// `depolarize`, `bloch-rotate`, `smear`.
//
// # Safety
// `s` must be a live handle, `noise` a valid C string, `out` writable.
enum PmcertStatus pmcert_simulate(const struct PmcertScenario *s,
                                  const char *noise,
                                  double delta,
                                  uint64_t seed,
                                  struct PmcertStats **out);

// # Safety
// Handles must be live and `out` writable.
enum PmcertStatus pmcert_deviation_epsilon(const struct PmcertStats *t,
                                           const struct PmcertScenario *s,
                                           double *out);

// Full certification report as JSON. Returns `Ok` for vacuous bounds too;
// the report's `status` field tells them apart.
//
// # Safety
// Handles must be live and `out` writable.
enum PmcertStatus pmcert_certify_json(const struct PmcertScenario *s,
                                      const struct PmcertStats *t,
                                      char **out);

// General-dimension overlap tolerances for a given ε.
//
// # Safety
// `state_tol` and `meas_tol` must be writable.
enum PmcertStatus pmcert_overlap_tolerances(double eps,
                                            size_t d,
                                            double *state_tol,
                                            double *meas_tol);

// Threshold of the average state-fidelity bound for a qubit scenario.
//
// # Safety
// `s` must be a live handle and `out` writable.
enum PmcertStatus pmcert_epsilon0(const struct PmcertScenario *s, double *out);

// Small-ε slope of the average state-fidelity bound.
//
// # Safety
// `s` must be a live handle and `out` writable.
enum PmcertStatus pmcert_asymptotic_constant(const struct PmcertScenario *s, double *out);

// Procrustes-route average fidelity lower bound over the outcome-0 states.
//
// # Safety
// `s` must be a live handle and `out` writable.
enum PmcertStatus pmcert_procrustes_bound(const struct PmcertScenario *s, double eps, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PMCERT_H */
