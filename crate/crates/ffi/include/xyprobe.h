#ifndef XYPROBE_H
#define XYPROBE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum XypStatus {
  XYP_STATUS_OK = 0,
  XYP_STATUS_NULL_POINTER = 1,
  XYP_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A computation produced an inconsistent or non-convergent result.
   */
  XYP_STATUS_NUMERICAL_FAILURE = 3,
  /**
   * A Rust panic was caught at the boundary.
   */
  XYP_STATUS_INTERNAL = 4,
} XypStatus;

/**
 * Chain, coupling and precomputed branch spectra.
 */
typedef struct XypModel XypModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Create a model for an `n_sites`-site chain with anisotropy `gamma`, field
 * `lambda`, and probe couplings `g`, `h`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one `XypModel*`.
 */
enum XypStatus xyp_model_new(uintptr_t n_sites,
                             double gamma,
                             double lambda,
                             double g,
                             double h,
                             struct XypModel **out);

/**
 * Release a model. Null is ignored.
 *
 * # Safety
 * `model` must come from [`xyp_model_new`] and not have been freed.
 */
void xyp_model_free(struct XypModel *model);

/**
 * One decoherence-tensor entry `Γ_{bra;ket}(t)`.
 *
 * # Safety
 * `model` must be live; `out_re` and `out_im` must be writable.
 */
enum XypStatus xyp_gamma_factor(const struct XypModel *model,
                                uint32_t bra,
                                uint32_t ket,
                                double t,
                                double *out_re,
                                double *out_im);

/**
 * All sixteen entries as 32 doubles: `[bra][ket]` row-major, interleaved.
 *
 * # Safety
 * `model` must be live; `out` must point to 32 writable doubles.
 */
enum XypStatus xyp_gamma_tensor(const struct XypModel *model, double t, double *out);

/**
 * Wootters concurrence of a 4×4 density matrix given as 32 interleaved doubles.
 *
 * # Safety
 * `rho` must point to 32 readable doubles; `out` must be writable.
 */
enum XypStatus xyp_concurrence(const double *rho, double *out);

/**
 * Concurrence at time `t` of probes prepared in `|+⟩|+⟩`.
 *
 * # Safety
 * `model` must be live; `out` must be writable.
 */
enum XypStatus xyp_evolve_concurrence(const struct XypModel *model, double t, double *out);

/**
 * Overlap of the paired-mode ground states of two branch Hamiltonians.
 *
 * # Safety
 * `model` must be live; `out` must be writable.
 */
enum XypStatus xyp_ground_state_overlap(const struct XypModel *model,
                                        uint32_t branch_a,
                                        uint32_t branch_b,
                                        double *out);

/**
 * Chain parameters of a model.
 *
 * # Safety
 * `model` must be live; each out-pointer must be writable or null to skip it.
 */
enum XypStatus xyp_model_params(const struct XypModel *model,
                                uintptr_t *n_sites,
                                double *gamma,
                                double *lambda,
                                double *g,
                                double *h);

/**
 * Static description of a status code.
 */
const char *xyp_status_message(enum XypStatus status);

/**
 * Detail of the last failure on this thread; empty if none. Valid until the
 * next failing call on the same thread.
 */
const char *xyp_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* XYPROBE_H */
