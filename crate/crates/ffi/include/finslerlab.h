#ifndef FINSLERLAB_H
#define FINSLERLAB_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum FlStatus {
  FL_STATUS_OK = 0,
  FL_STATUS_NULL_POINTER = 1,
  FL_STATUS_PARSE = 2,
  FL_STATUS_DOMAIN = 3,
  FL_STATUS_NUMERIC = 4,
  FL_STATUS_INVALID_ARGUMENT = 5,
  FL_STATUS_PANIC = 6,
} FlStatus;

/**
 * Opaque handle to a parsed metric.
 */
typedef struct FlMetric FlMetric;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *fl_version(void);

/**
 * Message of the last failure on this thread, or an empty string.
 * The pointer stays valid until the next call into the library on the same thread.
 */
const char *fl_last_error_message(void);

/**
 * Parses `F(x, y)` in dimension `n`. `guard_src` may be null.
 *
 * # Safety
 * `src` and a non-null `guard_src` must be NUL-terminated strings; `out` must be writable.
 */
enum FlStatus fl_metric_from_expr(const char *src,
                                  uintptr_t n,
                                  const char *guard_src,
                                  struct FlMetric **out);

/**
 * Builds a catalog metric such as `"funk"` or `"sphere_chart"`.
 *
 * # Safety
 * `label` must be a NUL-terminated string; `out` must be writable.
 */
enum FlStatus fl_metric_from_catalog(const char *label, uintptr_t n, struct FlMetric **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `m` must come from this library and must not be used afterwards.
 */
void fl_metric_free(struct FlMetric *m);

/**
 * Dimension of the base manifold, 0 for a null handle.
 *
 * # Safety
 * `m` must be null or a live handle.
 */
uintptr_t fl_metric_dim(const struct FlMetric *m);

/**
 * Evaluates `F(x, y)`. `x` and `y` hold `n` values each.
 *
 * # Safety
 * Pointers must be valid for the stated lengths.
 */
enum FlStatus fl_metric_eval(const struct FlMetric *m,
                             const double *x,
                             const double *y,
                             double *out);

/**
 * Writes `g_ij(x, y)` row-major into `out`, which must hold `n * n` values.
 *
 * # Safety
 * Pointers must be valid for the stated lengths.
 */
enum FlStatus fl_fundamental_tensor(const struct FlMetric *m,
                                    const double *x,
                                    const double *y,
                                    double *out,
                                    uintptr_t out_len);

/**
 * Writes the spray coefficients `G^i(x, y)` into `out`, which must hold `n` values.
 *
 * # Safety
 * Pointers must be valid for the stated lengths.
 */
enum FlStatus fl_spray(const struct FlMetric *m,
                       const double *x,
                       const double *y,
                       double *out,
                       uintptr_t out_len);

/**
 * Flag curvature `K(x, y, v)` of the plane spanned by `y` and `v`.
 *
 * # Safety
 * `x`, `y` and `v` must each hold `n` values; `out` must be writable.
 */
enum FlStatus fl_flag_curvature(const struct FlMetric *m,
                                const double *x,
                                const double *y,
                                const double *v,
                                double *out);

/**
 * Ricci scalar `Ric(x, y)`.
 *
 * # Safety
 * `x` and `y` must each hold `n` values; `out` must be writable.
 */
enum FlStatus fl_ricci_scalar(const struct FlMetric *m,
                              const double *x,
                              const double *y,
                              double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FINSLERLAB_H */
