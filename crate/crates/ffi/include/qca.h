#ifndef QCA_H
#define QCA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QcaStatus {
  QCA_STATUS_OK = 0,
  QCA_STATUS_NULL_POINTER = 1,
  QCA_STATUS_INVALID_UTF8 = 2,
  QCA_STATUS_SCHEMA = 3,
  QCA_STATUS_CHECK_FAILED = 4,
  QCA_STATUS_BUFFER_TOO_SMALL = 5,
  QCA_STATUS_PANIC = 6,
} QcaStatus;

/**
 * Opaque rule handle.
 */
typedef struct QcaRule QcaRule;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next library call on the same thread.
 */
const char *qca_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void qca_string_free(char *s);

/**
 * Parse a JSON rule file.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum QcaStatus qca_rule_from_json(const char *json, struct QcaRule **out);

/**
 * # Safety
 * `rule` must be null or a handle from this library, not yet freed.
 */
void qca_rule_free(struct QcaRule *rule);

/**
 * # Safety
 * `rule` must be a live handle and `out` writable.
 */
enum QcaStatus qca_rule_cell_dim(const struct QcaRule *rule, uintptr_t *out);

/**
 * Validate a rule. `worst_residual` (may be null) receives the largest
 * homomorphism or commutator residual; the status is `CheckFailed` when it
 * exceeds the tolerance.
 *
 * # Safety
 * `rule` must be a live handle; `worst_residual` null or writable.
 */
enum QcaStatus qca_rule_validate(const struct QcaRule *rule, double *worst_residual);

/**
 * `first ∘ second`: the image of an observable under `second`, then `first`.
 *
 * # Safety
 * Both handles must be live; `out` writable.
 */
enum QcaStatus qca_rule_compose(const struct QcaRule *first,
                                const struct QcaRule *second,
                                struct QcaRule **out);

/**
 * Explicit JSON rule file for a handle.
 *
 * # Safety
 * `rule` must be a live handle; `out` writable.
 */
enum QcaStatus qca_rule_to_json(const struct QcaRule *rule, char **out);

/**
 * Evolve a Pauli word (e.g. `"x"`, `"-i zyz@-1"`) under the Clifford rule
 * with images `xi` of X and `eta` of Y, one line per step.
 *
 * # Safety
 * String arguments must be NUL-terminated; `out` writable.
 */
enum QcaStatus qca_clifford_evolve(const char *xi,
                                   const char *eta,
                                   const char *pauli,
                                   uintptr_t steps,
                                   char **out);

/**
 * Final site distribution of a coined walk on a ring of `length` sites.
 * `coin` holds the 2 × 2 coin as 8 doubles (row-major re, im pairs),
 * `amplitudes` the (R, L) amplitudes at ring position `start` as 4 doubles.
 * Wrapping around the ring is allowed.
 *
 * # Safety
 * `coin` must point to 8 doubles, `amplitudes` to 4, `out` to `out_len`.
 */
enum QcaStatus qca_walk_distribution(const double *coin,
                                     const double *amplitudes,
                                     int64_t start,
                                     uintptr_t steps,
                                     uintptr_t length,
                                     double *out,
                                     uintptr_t out_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QCA_H */
