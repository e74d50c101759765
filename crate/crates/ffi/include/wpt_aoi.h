#ifndef WPT_AOI_H
#define WPT_AOI_H

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from crates/ffi. Do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WptAoiStatus {
  WPT_AOI_STATUS_OK = 0,
  WPT_AOI_STATUS_NULL_POINTER = 1,
  WPT_AOI_STATUS_DOMAIN = 3,
  WPT_AOI_STATUS_NO_SUCCESSES = 4,
  WPT_AOI_STATUS_INTERNAL = 5,
  WPT_AOI_STATUS_PANIC = 6,
} WptAoiStatus;

typedef enum WptAoiWindow {
  WPT_AOI_WINDOW_FIRST_SUCCESS_TO_LAST_SUCCESS = 0,
  WPT_AOI_WINDOW_FULL_HORIZON = 1,
} WptAoiWindow;

/**
 * Opaque parameter set.
 */
typedef struct WptAoiParams WptAoiParams;

/**
 * Opaque simulation result.
 */
typedef struct WptAoiSimulation WptAoiSimulation;

typedef struct WptAoiAnalytic {
  double beta;
  double pi;
  double e_t;
  double e_t2;
  double e_x;
  double e_x2;
  double e_q;
  double delta;
} WptAoiAnalytic;

typedef struct WptAoiOptResult {
  double b_star_j;
  double delta_star;
  uint64_t evaluations;
  double bracket_lo;
  double bracket_hi;
  bool converged;
  /**
   * 0 interior, -1 lower bound, +1 upper bound.
   */
  int32_t boundary;
} WptAoiOptResult;

/**
 * Summary statistics of a run. Confidence half-widths are NaN when there
 * were too few samples to form them.
 */
typedef struct WptAoiSimStats {
  double delta_hat;
  double delta_ci_half;
  double t_samples_mean;
  double t_samples_m2;
  double x_samples_mean;
  double x_samples_m2;
  double m_mean;
  uint64_t n_recharges;
  uint64_t n_successes;
  uint64_t n_slots_measured;
} WptAoiSimStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len - 1` bytes) and returns the full message length, or 0
 * when there is no error recorded.
 *
 * # Safety
 * `buf` must be NULL or point to `len` writable bytes.
 */
size_t wpt_aoi_last_error_message(char *buf, size_t len);

double wpt_aoi_dbm_to_watts(double x_dbm);

/**
 * # Safety
 * `out` must be a valid pointer to an `f64`.
 */
enum WptAoiStatus wpt_aoi_channel_rate_from_distance(double d_m,
                                                     double alpha,
                                                     double c0,
                                                     double *out);

/**
 * # Safety
 * `out` must be a valid pointer to an `f64`.
 */
enum WptAoiStatus wpt_aoi_average_aoi(double beta, double pi, double *out);

/**
 * Creates a parameter set. Powers and capacitor sizes are linear (W, J).
 *
 * # Safety
 * `out` must be a valid pointer; on success it receives a handle to free
 * with [`wpt_aoi_params_free`].
 */
enum WptAoiStatus wpt_aoi_params_new(double power_w,
                                     double efficiency,
                                     double noise_w,
                                     double rate_bpcu,
                                     double capacitor_j,
                                     double channel_rate,
                                     struct WptAoiParams **out);

/**
 * Parameter set with the reference link (-50 dBm noise, efficiency 0.5,
 * 0.05 BPCU, 20 m at path-loss exponent 2.2).
 *
 * # Safety
 * As for [`wpt_aoi_params_new`].
 */
enum WptAoiStatus wpt_aoi_params_reference(double power_w,
                                           double capacitor_j,
                                           struct WptAoiParams **out);

/**
 * # Safety
 * `params` must be a valid handle.
 */
enum WptAoiStatus wpt_aoi_params_set_capacitor(struct WptAoiParams *params, double capacitor_j);

/**
 * # Safety
 * `params` must be NULL or a handle from this library not yet freed.
 */
void wpt_aoi_params_free(struct WptAoiParams *params);

/**
 * # Safety
 * `params` must be a valid handle and `out` a valid pointer.
 */
enum WptAoiStatus wpt_aoi_analyze(const struct WptAoiParams *params, struct WptAoiAnalytic *out);

/**
 * Minimizes the average age over the capacitor size in `[b_lo, b_hi]`.
 * The capacitor stored in `params` is ignored.
 *
 * # Safety
 * `params` must be a valid handle and `out` a valid pointer.
 */
enum WptAoiStatus wpt_aoi_optimize(const struct WptAoiParams *params,
                                   double b_lo,
                                   double b_hi,
                                   double tol_rel,
                                   struct WptAoiOptResult *out);

/**
 * Runs the slot-level simulation.
 *
 * # Safety
 * `params` must be a valid handle and `out` a valid pointer; on success it
 * receives a handle to free with [`wpt_aoi_simulation_free`].
 */
enum WptAoiStatus wpt_aoi_simulate(const struct WptAoiParams *params,
                                   uint64_t horizon_slots,
                                   uint64_t seed,
                                   enum WptAoiWindow window,
                                   struct WptAoiSimulation **out);

/**
 * # Safety
 * `sim` must be a valid handle and `out` a valid pointer.
 */
enum WptAoiStatus wpt_aoi_simulation_stats(const struct WptAoiSimulation *sim,
                                           struct WptAoiSimStats *out);

/**
 * Number of recharge intervals recorded by the run.
 *
 * # Safety
 * `sim` must be NULL or a valid handle.
 */
size_t wpt_aoi_simulation_recharge_count(const struct WptAoiSimulation *sim);

/**
 * Number of delivered-update interarrival intervals recorded by the run.
 *
 * # Safety
 * `sim` must be NULL or a valid handle.
 */
size_t wpt_aoi_simulation_interarrival_count(const struct WptAoiSimulation *sim);

/**
 * Copies up to `len` recharge intervals (slots) into `buf`.
 *
 * # Safety
 * `sim` must be a valid handle, `buf` must point to `len` writable values,
 * and `written` must be NULL or valid.
 */
enum WptAoiStatus wpt_aoi_simulation_recharges(const struct WptAoiSimulation *sim,
                                               uint64_t *buf,
                                               size_t len,
                                               size_t *written);

/**
 * Copies up to `len` interarrival intervals (slots) into `buf`.
 *
 * # Safety
 * As for [`wpt_aoi_simulation_recharges`].
 */
enum WptAoiStatus wpt_aoi_simulation_interarrivals(const struct WptAoiSimulation *sim,
                                                   uint64_t *buf,
                                                   size_t len,
                                                   size_t *written);

/**
 * # Safety
 * `sim` must be NULL or a handle from this library not yet freed.
 */
void wpt_aoi_simulation_free(struct WptAoiSimulation *sim);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WPT_AOI_H */
