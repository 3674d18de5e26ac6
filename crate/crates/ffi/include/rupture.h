#ifndef RUPTURE_H
#define RUPTURE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RptStatus {
  RPT_STATUS_OK = 0,
  RPT_STATUS_MODEL_VIOLATION = 1,
  RPT_STATUS_CONFIG = 2,
  RPT_STATUS_NUMERICAL = 3,
  RPT_STATUS_NULL_POINTER = 4,
  RPT_STATUS_INVALID_ARGUMENT = 5,
  RPT_STATUS_PANIC = 6,
} RptStatus;

typedef struct RptConfig RptConfig;

typedef struct RptPeriodic RptPeriodic;

typedef struct RptRun RptRun;

typedef struct RptStationary RptStationary;

typedef struct RptConditionS {
  bool holds;
  bool threshold_localized;
  bool eta_a_clearance;
  /**
   * Distinguished interval, or -1.
   */
  int64_t interval;
} RptConditionS;

typedef struct RptBounds {
  double t_lower;
  double t_upper;
  bool lower_applicable;
  bool upper_applicable;
} RptBounds;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version; static storage, do not free.
 */
const char *rpt_version(void);

/**
 * Message for the last failed call on this thread, or null. Free with
 * [`rpt_string_free`].
 */
char *rpt_last_error_message(void);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void rpt_string_free(char *s);

/**
 * # Safety
 * `name` must be a nul-terminated string; `out` must be writable.
 */
enum RptStatus rpt_config_preset(const char *name, struct RptConfig **out);

/**
 * # Safety
 * `json` must be a nul-terminated string; `out` must be writable.
 */
enum RptStatus rpt_config_from_json(const char *json, struct RptConfig **out);

/**
 * Pretty JSON for the config. Free with [`rpt_string_free`].
 *
 * # Safety
 * `config` must be a live handle; `out` must be writable.
 */
enum RptStatus rpt_config_to_json(const struct RptConfig *config, char **out);

/**
 * Sets one field by `key` (dots for nested fields) from a JSON `value`.
 * The config is left unchanged on failure.
 *
 * # Safety
 * `config` must be a live handle; `key` and `value` nul-terminated.
 */
enum RptStatus rpt_config_set(struct RptConfig *config, const char *key, const char *value);

/**
 * # Safety
 * `config` must come from this library or be null.
 */
void rpt_config_free(struct RptConfig *config);

/**
 * # Safety
 * `config` must be a live handle; `out` must be writable.
 */
enum RptStatus rpt_stationary_solve(const struct RptConfig *config, struct RptStationary **out);

/**
 * # Safety
 * `profile` must be a live handle; `out` must be writable.
 */
enum RptStatus rpt_stationary_eval(const struct RptStationary *profile, double x, double *out);

/**
 * # Safety
 * Both handles must be live; `out` must be writable.
 */
enum RptStatus rpt_stationary_condition_s(const struct RptStationary *profile,
                                          const struct RptConfig *config,
                                          struct RptConditionS *out);

/**
 * # Safety
 * `profile` must come from this library or be null.
 */
void rpt_stationary_free(struct RptStationary *profile);

/**
 * Rupture-time bounds for `eta0` (`len` nodes, or constant `eta_a` when
 * null).
 *
 * # Safety
 * `config` must be live; `eta0` null or `len` readable values.
 */
enum RptStatus rpt_bounds(const struct RptConfig *config,
                          const double *eta0,
                          size_t len,
                          struct RptBounds *out);

/**
 * Evolves with ruptures until `max_events` events or time `t_end`
 * (non-positive values disable a criterion; both disabled means
 * `numerics.max_ruptures`).
 *
 * # Safety
 * `config` must be live; `eta0` null or `len` readable values; `out`
 * writable.
 */
enum RptStatus rpt_simulate(const struct RptConfig *config,
                            const double *eta0,
                            size_t len,
                            int64_t max_events,
                            double t_end,
                            struct RptRun **out);

/**
 * # Safety
 * `run` must be a live handle.
 */
size_t rpt_run_event_count(const struct RptRun *run);

/**
 * Time of event `index` (0-based).
 *
 * # Safety
 * `run` must be live; `out` writable.
 */
enum RptStatus rpt_run_event_time(const struct RptRun *run, size_t index, double *out);

/**
 * Reset interval indices of event `index`. `len` receives the count even
 * when `cap` is too small.
 *
 * # Safety
 * `run` must be live; `buf` holds `cap` values; `len` writable.
 */
enum RptStatus rpt_run_event_intervals(const struct RptRun *run,
                                       size_t index,
                                       size_t *buf,
                                       size_t cap,
                                       size_t *len);

/**
 * Nodal `eta` just before the reset of event `index`.
 *
 * # Safety
 * `run` must be live; `buf` holds `cap` values; `len` writable.
 */
enum RptStatus rpt_run_pre_profile(const struct RptRun *run,
                                   size_t index,
                                   double *buf,
                                   size_t cap,
                                   size_t *len);

/**
 * # Safety
 * `run` must come from this library or be null.
 */
void rpt_run_free(struct RptRun *run);

/**
 * Fixed-point search starting from `eta0` (constant `eta_a` when null).
 * Non-positive `fp_tol` or zero `max_iter` fall back to the config.
 *
 * # Safety
 * `config` must be live; `eta0` null or `len` readable values; `out`
 * writable.
 */
enum RptStatus rpt_find_periodic(const struct RptConfig *config,
                                 const double *eta0,
                                 size_t len,
                                 double fp_tol,
                                 size_t max_iter,
                                 struct RptPeriodic **out);

/**
 * # Safety
 * `result` must be a live handle.
 */
bool rpt_periodic_converged(const struct RptPeriodic *result);

/**
 * Time between the last two ruptures, or NaN for a null handle.
 *
 * # Safety
 * `result` must be a live handle.
 */
double rpt_periodic_period(const struct RptPeriodic *result);

/**
 * # Safety
 * `result` must be a live handle.
 */
size_t rpt_periodic_iterations(const struct RptPeriodic *result);

/**
 * # Safety
 * `result` must be live; `buf` holds `cap` values; `len` writable.
 */
enum RptStatus rpt_periodic_profile(const struct RptPeriodic *result,
                                    double *buf,
                                    size_t cap,
                                    size_t *len);

/**
 * # Safety
 * `result` must come from this library or be null.
 */
void rpt_periodic_free(struct RptPeriodic *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RUPTURE_H */
