#ifndef SECLIN_H
#define SECLIN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum SeclinStatus {
  SECLIN_STATUS_OK = 0,
  SECLIN_STATUS_NULL_POINTER = 1,
  SECLIN_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed JSON or matrix entries.
   */
  SECLIN_STATUS_PARSE = 3,
  /**
   * Shapes, dimensions or `D·E = F` violated.
   */
  SECLIN_STATUS_VALIDATION = 4,
  /**
   * The reduced-rank condition fails, or leakage is unbounded.
   */
  SECLIN_STATUS_INSECURE = 5,
  /**
   * The exhaustive audit would exceed its state limit.
   */
  SECLIN_STATUS_INFEASIBLE = 6,
  SECLIN_STATUS_INVALID_ARGUMENT = 7,
  /**
   * A Rust panic was caught at the boundary.
   */
  SECLIN_STATUS_PANIC = 8,
} SeclinStatus;

/**
 * A loaded scheme, with its randomness coefficients if the document had them.
 */
typedef struct SeclinScheme SeclinScheme;

/**
 * A scheme with randomness coefficients.
 */
typedef struct SeclinSecured SeclinSecured;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *seclin_last_error(void);

/**
 * Library version, a static NUL-terminated string.
 */
const char *seclin_version(void);

/**
 * Parses and validates a scheme document.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum SeclinStatus seclin_scheme_load_json(const char *json, struct SeclinScheme **out);

/**
 * # Safety
 * `s` must come from [`seclin_scheme_load_json`] and not be used afterwards. Null is ignored.
 */
void seclin_scheme_free(struct SeclinScheme *s);

/**
 * Servers, users and messages.
 *
 * # Safety
 * `s` must be a live handle; the out-pointers must be writable.
 */
enum SeclinStatus seclin_scheme_dims(const struct SeclinScheme *s, size_t *n, size_t *k, size_t *l);

/**
 * Secrecy and cost report as JSON; `all_pass` receives 1 when every
 * applicable check passes.
 *
 * # Safety
 * `s` must be a live handle; `out_json` and `all_pass` must be writable.
 */
enum SeclinStatus seclin_check_json(const struct SeclinScheme *s,
                                    char **out_json,
                                    int32_t *all_pass);

/**
 * Secures the scheme with the canonical `Null(D)` basis. Fails with
 * `SECLIN_STATUS_INSECURE` when some user breaks the reduced-rank condition.
 *
 * # Safety
 * `s` must be a live handle; `out` must be writable.
 */
enum SeclinStatus seclin_secure(const struct SeclinScheme *s, struct SeclinSecured **out);

/**
 * The randomness coefficients carried by the loaded document itself.
 *
 * # Safety
 * `s` must be a live handle; `out` must be writable.
 */
enum SeclinStatus seclin_scheme_secured(const struct SeclinScheme *s, struct SeclinSecured **out);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards. Null is ignored.
 */
void seclin_secured_free(struct SeclinSecured *s);

/**
 * Number of randomness symbols, or 0 for a null handle.
 *
 * # Safety
 * `s` must be null or a live handle.
 */
size_t seclin_secured_x(const struct SeclinSecured *s);

/**
 * The secured scheme as a document including `"C"`.
 *
 * # Safety
 * `s` must be a live handle; `out_json` must be writable.
 */
enum SeclinStatus seclin_secured_to_json(const struct SeclinSecured *s, char **out_json);

/**
 * Exact leakage in bits by exhaustive enumeration (prime fields only).
 *
 * # Safety
 * `s` must be a live handle; `bits` and `exact_zero` must be writable.
 */
enum SeclinStatus seclin_audit_exact(const struct SeclinSecured *s,
                                     size_t user,
                                     double *bits,
                                     int32_t *exact_zero);

/**
 * Leakage bound in nats and the ratio `M_k` (real schemes only).
 *
 * # Safety
 * `s` must be a live handle; `bound` and `m_k` must be writable.
 */
enum SeclinStatus seclin_leakage_bound(const struct SeclinSecured *s,
                                       size_t user,
                                       double sigma_w,
                                       double sigma_c,
                                       double *bound,
                                       double *m_k);

/**
 * Exact Gaussian leakage in nats (real schemes only).
 *
 * # Safety
 * `s` must be a live handle; `nats` must be writable.
 */
enum SeclinStatus seclin_leakage_gaussian(const struct SeclinSecured *s,
                                          size_t user,
                                          double sigma_w,
                                          double sigma_c,
                                          double *nats);

/**
 * Smallest σ_c whose bound is at most `eps` nats.
 *
 * # Safety
 * `s` must be a live handle; `sigma_c` must be writable.
 */
enum SeclinStatus seclin_epsilon_to_sigma(const struct SeclinSecured *s,
                                          size_t user,
                                          double sigma_w,
                                          double eps,
                                          double *sigma_c);

/**
 * Runs `trials` seeded protocol trials; `success_rate` is the fraction of
 * (trial, user) pairs that decoded correctly.
 *
 * # Safety
 * `s` must be a live handle; `success_rate` must be writable.
 */
enum SeclinStatus seclin_simulate(const struct SeclinSecured *s,
                                  uint64_t seed,
                                  uint64_t trials,
                                  double sigma_w,
                                  double sigma_c,
                                  double tol,
                                  double *success_rate);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void seclin_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SECLIN_H */
