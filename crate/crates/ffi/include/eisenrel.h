#ifndef EISENREL_H
#define EISENREL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum EisenrelStatus {
  EISENREL_STATUS_OK = 0,
  EISENREL_STATUS_NULL_POINTER = 1,
  EISENREL_STATUS_INVALID_ARGUMENT = 2,
  EISENREL_STATUS_NON_HOLOMORPHIC = 3,
  EISENREL_STATUS_INVALID_INSTANCE = 4,
  EISENREL_STATUS_NUMERIC_DOMAIN = 5,
  EISENREL_STATUS_INTERNAL = 6,
} EisenrelStatus;

/**
 * Opaque handle to an exact truncated q-expansion.
 */
typedef struct EisenrelSeries EisenrelSeries;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread (empty after a success).
 * The pointer stays valid until the next call into the library on this thread.
 */
const char *eisenrel_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *eisenrel_version(void);

/**
 * Builds the expansion of `E^(weight;level)_(a1,a2)` to order `order`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum EisenrelStatus eisenrel_series_new(uint32_t level,
                                        uint32_t weight,
                                        int64_t a1,
                                        int64_t a2,
                                        uint32_t order,
                                        struct EisenrelSeries **out);

/**
 * Releases a handle from [`eisenrel_series_new`]. Null is ignored.
 *
 * # Safety
 * `series` must be null or a handle not yet freed.
 */
void eisenrel_series_free(struct EisenrelSeries *series);

/**
 * Level of the series, or 0 for a null handle.
 *
 * # Safety
 * `series` must be null or a live handle.
 */
uint32_t eisenrel_series_level(const struct EisenrelSeries *series);

/**
 * Truncation order of the series, or 0 for a null handle.
 *
 * # Safety
 * `series` must be null or a live handle.
 */
uint32_t eisenrel_series_order(const struct EisenrelSeries *series);

/**
 * Evaluates the truncated series at `tau` with `zeta_N = exp(2 pi i/N)`.
 *
 * # Safety
 * `series` must be a live handle; `out_re` and `out_im` must be writable.
 */
enum EisenrelStatus eisenrel_series_eval(const struct EisenrelSeries *series,
                                         double tau_re,
                                         double tau_im,
                                         double *out_re,
                                         double *out_im);

/**
 * Writes the JSON form of the series to `*out`; free it with [`eisenrel_string_free`].
 *
 * # Safety
 * `series` must be a live handle and `out` writable.
 */
enum EisenrelStatus eisenrel_series_to_json(const struct EisenrelSeries *series, char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void eisenrel_string_free(char *s);

/**
 * Verifies the relation of split `(k1, k2)` at `a`, `b`, `c = -a - b` to order `order`.
 * On success `*residual_zero` is 1 or 0 and `*first_nonzero` is the first
 * nonzero exponent (in units of `1/N`) or -1.
 *
 * # Safety
 * `residual_zero` and `first_nonzero` must be writable.
 */
enum EisenrelStatus eisenrel_verify_relation(uint32_t level,
                                             uint32_t k1,
                                             uint32_t k2,
                                             int64_t a1,
                                             int64_t a2,
                                             int64_t b1,
                                             int64_t b2,
                                             uint32_t order,
                                             int32_t *residual_zero,
                                             int64_t *first_nonzero);

/**
 * `E^(k)_z(tau)` at `z = x1 tau + x2` from the Fourier expansion with `fourier_terms` terms.
 *
 * # Safety
 * `out_re` and `out_im` must be writable.
 */
enum EisenrelStatus eisenrel_eval_fourier(uint32_t weight,
                                          double x1,
                                          double x2,
                                          double tau_re,
                                          double tau_im,
                                          uint32_t fourier_terms,
                                          double *out_re,
                                          double *out_im);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EISENREL_H */
