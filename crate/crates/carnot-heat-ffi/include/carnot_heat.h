#ifndef CARNOT_HEAT_H
#define CARNOT_HEAT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible call.
 */
typedef enum ChStatus {
  ChOk = 0,
  /**
   * a check ran and failed
   */
  ChCheckFailed = 1,
  /**
   * bad arguments, unknown names, malformed configs
   */
  ChInvalidInput = 2,
  ChNullPointer = 3,
  ChRuntimeError = 4,
} ChStatus;

/**
 * Opaque level-set domain handle, bound to the group it was built for.
 */
typedef struct ChDomain ChDomain;

/**
 * Opaque Carnot group handle.
 */
typedef struct ChGroup ChGroup;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message for this thread into `buf` (NUL-terminated,
 * truncated to `len` bytes). Returns the full message length.
 *
 * # Safety
 * `buf` must point to `len` writable bytes, or be null (query mode).
 */
uintptr_t ch_last_error(char *buf, uintptr_t len);

/**
 * Builds a group from a registry name such as "heisenberg:1" or
 * "euclidean:3".
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum ChStatus ch_group_new(const char *name, struct ChGroup **out);

/**
 * Frees a group handle; a null pointer is a no-op.
 *
 * # Safety
 * `g` must come from `ch_group_new` and not be freed twice.
 */
void ch_group_free(struct ChGroup *g);

/**
 * Topological dimension, or 0 on a null handle.
 *
 * # Safety
 * `g` must be a live group handle or null.
 */
uintptr_t ch_group_dim(const struct ChGroup *g);

/**
 * Homogeneous dimension Q, or 0 on a null handle.
 *
 * # Safety
 * `g` must be a live group handle or null.
 */
uintptr_t ch_group_homogeneous_dim(const struct ChGroup *g);

/**
 * Builds a domain from a registry name such as "h1-torus:2,0.5".
 *
 * # Safety
 * `g` must be a live group handle, `name` NUL-terminated, `out` valid.
 */
enum ChStatus ch_domain_new(const struct ChGroup *g, const char *name, struct ChDomain **out);

/**
 * Frees a domain handle; a null pointer is a no-op.
 *
 * # Safety
 * `d` must come from `ch_domain_new` and not be freed twice.
 */
void ch_domain_free(struct ChDomain *d);

/**
 * Membership test: writes 1 into `out` when x lies in the open domain.
 *
 * # Safety
 * `x` must point to `len` doubles matching the group dimension.
 */
enum ChStatus ch_domain_contains(const struct ChDomain *d,
                                 const double *x,
                                 uintptr_t len,
                                 int32_t *out);

/**
 * Horizontal perimeter by the shell co-area estimator.
 *
 * # Safety
 * Handles must be live; `value` and `stderr` must be valid pointers.
 */
enum ChStatus ch_perimeter_shell(const struct ChGroup *g,
                                 const struct ChDomain *d,
                                 double eps,
                                 uintptr_t samples,
                                 uint64_t seed,
                                 double *value,
                                 double *stderr);

/**
 * Heat content Q^(alpha)(t) with default estimator settings; writes the
 * estimate and its standard error.
 *
 * # Safety
 * Handles must be live; `q` and `stderr` must be valid pointers.
 */
enum ChStatus ch_heat_content(const struct ChGroup *g,
                              const struct ChDomain *d,
                              double alpha,
                              double t,
                              uintptr_t samples,
                              uintptr_t grid,
                              uint64_t seed,
                              double *q,
                              double *stderr);

/**
 * Small-time rate function mu_alpha(t); for alpha > 1 the constant
 * kappa_alpha is estimated from `kappa_samples` Monte Carlo draws.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum ChStatus ch_rate_mu(double alpha,
                         double t,
                         uintptr_t kappa_samples,
                         uint64_t seed,
                         double *out);

/**
 * Runs an experiment config file, writing CSV and JSON into `out_dir`.
 * Returns ChOk when every verdict passes and ChCheckFailed otherwise.
 *
 * # Safety
 * Both paths must be NUL-terminated strings.
 */
enum ChStatus ch_run_experiment(const char *config_path, const char *out_dir);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* CARNOT_HEAT_H */
