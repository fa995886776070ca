#ifndef KGBOUNDS_H
#define KGBOUNDS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum KgbStatus {
  KGB_STATUS_OK = 0,
  KGB_STATUS_NULL_POINTER = 1,
  KGB_STATUS_INVALID_ARGUMENT = 2,
  KGB_STATUS_DOMAIN = 3,
  KGB_STATUS_PARSE = 4,
  KGB_STATUS_UNKNOWN_NAME = 5,
  KGB_STATUS_RESOURCE = 6,
  KGB_STATUS_BUDGET = 7,
  KGB_STATUS_DEGENERATE = 8,
  KGB_STATUS_CERTIFICATE = 9,
  KGB_STATUS_IO = 10,
  KGB_STATUS_PANIC = 11,
} KgbStatus;

/**
 * Facet status as reported by [`kgb_facet_status`].
 */
typedef enum KgbFacetStatus {
  KGB_FACET_STATUS_FACET = 0,
  KGB_FACET_STATUS_FACE = 1,
  KGB_FACET_STATUS_HEURISTIC = 2,
  KGB_FACET_STATUS_INSIDE = 3,
} KgbFacetStatus;

/**
 * A configuration of lines.
 */
typedef struct KgbConfiguration KgbConfiguration;

/**
 * Outcome of the facet loop.
 */
typedef struct KgbFacet KgbFacet;

/**
 * A real matrix, kept exact when it was built from exact data.
 */
typedef struct KgbMatrix KgbMatrix;

/**
 * Outcome of an exact `SDP_1` solve.
 */
typedef struct KgbSolveResult KgbSolveResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL
 * terminated, truncated to `len`). Returns the full message length without
 * the terminator, or 0 when there is no error.
 */
size_t kgb_last_error_message(char *buf, size_t len);

/**
 * Library version as a static string.
 */
const char *kgb_version(void);

/**
 * Releases a string returned by the library.
 */
void kgb_string_free(char *s);

/**
 * Builds a catalog configuration by name.
 */
enum KgbStatus kgb_configuration_generate(const char *name, struct KgbConfiguration **out);

void kgb_configuration_free(struct KgbConfiguration *c);

/**
 * Ambient dimension, or 0 for a null handle.
 */
size_t kgb_configuration_dim(const struct KgbConfiguration *c);

/**
 * Number of lines, or 0 for a null handle.
 */
size_t kgb_configuration_size(const struct KgbConfiguration *c);

/**
 * Gram matrix `P_xy = ⟨a_x, b_y⟩` of two configurations (pass the same
 * handle twice for a square one).
 */
enum KgbStatus kgb_gram(const struct KgbConfiguration *a,
                        const struct KgbConfiguration *b,
                        struct KgbMatrix **out);

/**
 * Integer matrix from `rows·cols` row-major entries.
 */
enum KgbStatus kgb_matrix_from_ints(size_t rows,
                                    size_t cols,
                                    const int64_t *data,
                                    struct KgbMatrix **out);

/**
 * Floating-point matrix from `rows·cols` row-major entries.
 */
enum KgbStatus kgb_matrix_from_f64(size_t rows,
                                   size_t cols,
                                   const double *data,
                                   struct KgbMatrix **out);

void kgb_matrix_free(struct KgbMatrix *m);

size_t kgb_matrix_rows(const struct KgbMatrix *m);

size_t kgb_matrix_cols(const struct KgbMatrix *m);

/**
 * Copies the entries, row-major, as doubles into `buf` of length `len`.
 */
enum KgbStatus kgb_matrix_to_f64(const struct KgbMatrix *m, double *buf, size_t len);

/**
 * Solves `SDP_1[M]` by branch and bound. `node_budget` 0 means unlimited;
 * when the budget runs out the handle is still produced and the call
 * returns `KGB_STATUS_BUDGET`.
 */
enum KgbStatus kgb_solve_exact(const struct KgbMatrix *m,
                               uint64_t node_budget,
                               struct KgbSolveResult **out);

void kgb_solve_result_free(struct KgbSolveResult *r);

double kgb_solve_result_value(const struct KgbSolveResult *r);

/**
 * True when the value carries an optimality proof.
 */
bool kgb_solve_result_optimal(const struct KgbSolveResult *r);

/**
 * Exact value as text, e.g. `5/2` or `1 + 2*sqrt(5)`.
 */
char *kgb_solve_result_value_string(const struct KgbSolveResult *r);

/**
 * Full result as JSON.
 */
char *kgb_solve_result_to_json(const struct KgbSolveResult *r);

/**
 * Heuristic lower estimate of `SDP_n[M]` by alternating maximisation.
 */
enum KgbStatus kgb_solve_heuristic(const struct KgbMatrix *m,
                                   size_t n,
                                   size_t restarts,
                                   uint64_t seed,
                                   double *value);

/**
 * Runs the facet loop on `Gram(a, b)` against the rank-`n` body. With
 * `symmetric` the search is restricted to matrices invariant under the
 * configurations' reflection group.
 */
enum KgbStatus kgb_facet_run(const struct KgbConfiguration *a,
                             const struct KgbConfiguration *b,
                             size_t n,
                             bool symmetric,
                             uint64_t seed,
                             struct KgbFacet **out);

void kgb_facet_free(struct KgbFacet *f);

enum KgbFacetStatus kgb_facet_status(const struct KgbFacet *f);

/**
 * `⟨A, P⟩ / SDP_n[A]` as a double.
 */
double kgb_facet_ratio(const struct KgbFacet *f);

/**
 * Exact ratio as text, or null when it is not known exactly.
 */
char *kgb_facet_ratio_string(const struct KgbFacet *f);

/**
 * `λ` with `A ∝ P − λI` as text, or null when `A` is not of that form.
 */
char *kgb_facet_lambda_string(const struct KgbFacet *f);

/**
 * Facet record as JSON.
 */
char *kgb_facet_to_json(const struct KgbFacet *f);

/**
 * Copies the integer normal `A` (row-major) into `buf`.
 */
enum KgbStatus kgb_facet_normal(const struct KgbFacet *f, int64_t *buf, size_t len);

/**
 * `γ(d)/γ(n)` as a double.
 */
enum KgbStatus kgb_gamma_ratio(size_t d, size_t n, double *value);

/**
 * Infinite-order bound of Davie and Reeds and its maximiser.
 */
enum KgbStatus kgb_davie_bound(double *value, double *lambda);

/**
 * Upper bound `1/(α η_A η_B)` with `α = v0/(1+ε)`, rounded upwards.
 */
enum KgbStatus kgb_shrinking_upper(double v0,
                                   double epsilon,
                                   double eta_a,
                                   double eta_b,
                                   double *value);

/**
 * Shrinking factor of a configuration (dimension at most 4).
 */
enum KgbStatus kgb_shrinking_factor(const struct KgbConfiguration *c, double *eta);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KGBOUNDS_H */
