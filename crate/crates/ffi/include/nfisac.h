/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef NFISAC_H
#define NFISAC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NfisacStatus {
  NFISAC_STATUS_OK = 0,
  NFISAC_STATUS_NULL_POINTER = 1,
  NFISAC_STATUS_INVALID_ARGUMENT = 2,
  /*
   The design problem has no feasible point for the requested thresholds.
   */
  NFISAC_STATUS_INFEASIBLE = 3,
  /*
   Singular geometry, degenerate beam or solver breakdown.
   */
  NFISAC_STATUS_NUMERICAL = 4,
  NFISAC_STATUS_IO = 5,
  /*
   Output buffer too small; the required length is reported.
   */
  NFISAC_STATUS_BUFFER_TOO_SMALL = 6,
  NFISAC_STATUS_PANIC = 7,
} NfisacStatus;

typedef enum NfisacScheme {
  NFISAC_SCHEME_RSMA_HB = 0,
  NFISAC_SCHEME_RSMA_FD = 1,
  NFISAC_SCHEME_RSMA_SC = 2,
  NFISAC_SCHEME_SDMA_HB = 3,
  NFISAC_SCHEME_RSMA_FAR = 4,
} NfisacScheme;

/*
 Solver outcome, mirrors the `status` CSV column.
 */
typedef enum NfisacSolveStatus {
  NFISAC_SOLVE_STATUS_CONVERGED = 0,
  NFISAC_SOLVE_STATUS_NOT_CONVERGED = 1,
  NFISAC_SOLVE_STATUS_INFEASIBLE = 2,
  NFISAC_SOLVE_STATUS_FAILED = 3,
} NfisacSolveStatus;

/*
 Result of one scheme run.
 */
typedef struct NfisacReport NfisacReport;

/*
 One sampled problem instance: geometry, positions, channels and sensing model.
 */
typedef struct NfisacScenario NfisacScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null. Valid until the
 next failing call on the same thread.
 */
const char *nfisac_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *nfisac_version(void);

/*
 Samples the desk-scale instance for `seed` (N=16, M=8, L=4, K=2, 20 dBm,
 CRB thresholds 10x those of the matched-filter start).

 # Safety
 `out` must be a valid pointer to writable storage for one handle.
 */
enum NfisacStatus nfisac_scenario_desk(uint64_t seed, struct NfisacScenario **out);

/*
 Samples an instance from a TOML experiment config at sweep value `axis_value`.

 # Safety
 `path` must be a NUL-terminated string; `out` as in [`nfisac_scenario_desk`].
 */
enum NfisacStatus nfisac_scenario_from_config(const char *path,
                                              double axis_value,
                                              uint64_t seed,
                                              struct NfisacScenario **out);

/*
 # Safety
 `scenario` must be null or a handle from this library not yet freed.
 */
void nfisac_scenario_free(struct NfisacScenario *scenario);

/*
 Number of users, transmit antennas and RF chains of the instance.

 # Safety
 `scenario` must be a live handle; the outputs must be writable or null.
 */
enum NfisacStatus nfisac_scenario_dims(const struct NfisacScenario *scenario,
                                       size_t *users,
                                       size_t *n_tx,
                                       size_t *n_rf);

/*
 Runs one scheme on the instance with the config's schedule.

 # Safety
 `scenario` must be a live handle; `out` must be writable.
 */
enum NfisacStatus nfisac_solve(const struct NfisacScenario *scenario,
                               enum NfisacScheme scheme,
                               struct NfisacReport **out);

/*
 # Safety
 `report` must be null or a handle from this library not yet freed.
 */
void nfisac_report_free(struct NfisacReport *report);

/*
 Max–min secrecy rate (bits/s/Hz) and the achieved angle (rad²) and range
 (m²) CRBs of the hybrid beamfocuser. Null outputs are skipped.

 # Safety
 `report` must be a live handle; the outputs must be writable or null.
 */
enum NfisacStatus nfisac_report_metrics(const struct NfisacReport *report,
                                        double *secrecy,
                                        double *crb_angle,
                                        double *crb_range);

/*
 Solver outcome and iteration count.

 # Safety
 `report` must be a live handle; the outputs must be writable or null.
 */
enum NfisacStatus nfisac_report_status(const struct NfisacReport *report,
                                       enum NfisacSolveStatus *status,
                                       size_t *iterations);

/*
 Copies the hybrid beamfocuser `FW` (N × (K+1), column-major, Watts^½)
 into `re` / `im`. `len` is the capacity of each buffer; `needed` receives
 `N (K+1)`. Returns `BufferTooSmall` without writing when `len` is short.

 # Safety
 `report` must be a live handle; `re` and `im` must hold `len` doubles.
 */
enum NfisacStatus nfisac_report_beamformer(const struct NfisacReport *report,
                                           double *re,
                                           double *im,
                                           size_t len,
                                           size_t *needed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NFISAC_H */
