#ifndef RANLAT_H
#define RANLAT_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum RanlatStatus {
  RANLAT_STATUS_OK = 0,
  RANLAT_STATUS_NULL_POINTER = 1,
  RANLAT_STATUS_INVALID_UTF8 = 2,
  RANLAT_STATUS_INVALID_PARAMETER = 3,
  RANLAT_STATUS_DIMENSION_MISMATCH = 4,
  RANLAT_STATUS_DOMAIN = 5,
  RANLAT_STATUS_NOT_PRIME = 6,
  RANLAT_STATUS_UNSUPPORTED = 7,
  RANLAT_STATUS_BUFFER_TOO_SMALL = 8,
  RANLAT_STATUS_PANIC = 9,
} RanlatStatus;

// Weighted Korobov space parameters.
typedef struct RanlatParams RanlatParams;

// Rank-1 lattice rule.
typedef struct RanlatRule RanlatRule;

// Outcome of a random generating vector selection.
typedef struct RanlatSelection RanlatSelection;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or an empty string.
// Valid until the next call into this library on the same thread.
const char *ranlat_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *ranlat_version(void);

// Creates space parameters. `weights` is `"poly:a"` or `"list:g1,g2,..."`.
//
// # Safety
// `weights` must be a NUL-terminated string; `out` must be writable.
enum RanlatStatus ranlat_params_new(double alpha,
                                    const char *weights,
                                    size_t dim,
                                    struct RanlatParams **out);

// # Safety
// `params` must be null or a handle from [`ranlat_params_new`].
void ranlat_params_free(struct RanlatParams *params);

// Creates a rule with `dim` generating vector entries read from `z`.
//
// # Safety
// `z` must point to `dim` values; `out` must be writable.
enum RanlatStatus ranlat_rule_new(uint64_t n,
                                  const uint64_t *z,
                                  size_t dim,
                                  struct RanlatRule **out);

// # Safety
// `rule` must be null or a handle from this library.
void ranlat_rule_free(struct RanlatRule *rule);

// Number of points, or 0 for a null handle.
//
// # Safety
// `rule` must be null or a live handle.
uint64_t ranlat_rule_n_points(const struct RanlatRule *rule);

// Dimension, or 0 for a null handle.
//
// # Safety
// `rule` must be null or a live handle.
size_t ranlat_rule_dim(const struct RanlatRule *rule);

// Copies the generating vector into `out` (at least `dim` entries).
//
// # Safety
// `out` must be writable for `len` values.
enum RanlatStatus ranlat_rule_gen_vector(const struct RanlatRule *rule, uint64_t *out, size_t len);

// Writes the `N * dim` point coordinates row by row. `shift` is null or
// points to `dim` values in `[0, 1)`.
//
// # Safety
// `shift` must be null or readable for `dim` values; `out` must be writable
// for `len` values.
enum RanlatStatus ranlat_rule_points(const struct RanlatRule *rule,
                                     const double *shift,
                                     double *out,
                                     size_t len);

// Squared worst-case error from the closed form (integer alpha in 1..=4).
//
// # Safety
// Handles must be live; `out_squared_error` must be writable.
enum RanlatStatus ranlat_wce_closed_form(const struct RanlatRule *rule,
                                         const struct RanlatParams *params,
                                         double *out_squared_error);

// Squared worst-case error from the dual-lattice series with frequencies
// `|k_j| <= k_max` summed explicitly, and a bound on its truncation error.
//
// # Safety
// Handles must be live; outputs must be writable. `out_tail_bound` may be null.
enum RanlatStatus ranlat_wce_brute_force(const struct RanlatRule *rule,
                                         const struct RanlatParams *params,
                                         uint64_t k_max,
                                         double *out_squared_error,
                                         double *out_tail_bound);

// Best of `r` random generating vectors for a random prime `N` in
// `(M/2, M]`, or for `fixed_n` when it is nonzero. `r_rule` is `"ran"`,
// `"rms"`, `"stable"` or `"fixed:K"`.
//
// # Safety
// `r_rule` must be a NUL-terminated string; handles must be live; `out` must
// be writable.
enum RanlatStatus ranlat_select(uint64_t m_max,
                                uint64_t fixed_n,
                                double eta,
                                const char *r_rule,
                                uint64_t seed,
                                const struct RanlatParams *params,
                                struct RanlatSelection **out);

// # Safety
// `selection` must be null or a handle from [`ranlat_select`].
void ranlat_selection_free(struct RanlatSelection *selection);

// Chosen modulus, or 0 for a null handle.
//
// # Safety
// `selection` must be null or a live handle.
uint64_t ranlat_selection_n(const struct RanlatSelection *selection);

// Number of candidates drawn, or 0 for a null handle.
//
// # Safety
// `selection` must be null or a live handle.
uint32_t ranlat_selection_r(const struct RanlatSelection *selection);

// Index of the chosen candidate, or 0 for a null handle.
//
// # Safety
// `selection` must be null or a live handle.
size_t ranlat_selection_argmin_index(const struct RanlatSelection *selection);

// Squared worst-case error of the chosen vector, or NaN for a null handle.
//
// # Safety
// `selection` must be null or a live handle.
double ranlat_selection_squared_error(const struct RanlatSelection *selection);

// Copies the chosen generating vector (dimension entries).
//
// # Safety
// `out` must be writable for `len` values.
enum RanlatStatus ranlat_selection_z(const struct RanlatSelection *selection,
                                     uint64_t *out,
                                     size_t len);

// Copies the `r` candidate squared errors in draw order.
//
// # Safety
// `out` must be writable for `len` values.
enum RanlatStatus ranlat_selection_candidate_errors(const struct RanlatSelection *selection,
                                                    double *out,
                                                    size_t len);

// New rule handle for the chosen vector.
//
// # Safety
// `selection` must be live; `out` must be writable.
enum RanlatStatus ranlat_selection_rule(const struct RanlatSelection *selection,
                                        struct RanlatRule **out);

// Component-by-component construction for prime `n` in the dimension of
// `params`. With `randomized`, each component is drawn uniformly from the
// `ceil(tau (n - 1))` best candidates using `seed`; otherwise `tau` and
// `seed` are ignored.
//
// # Safety
// `out_z` must be writable for `len` values; `out_squared_error` may be null.
enum RanlatStatus ranlat_cbc(uint64_t n,
                             const struct RanlatParams *params,
                             bool randomized,
                             double tau,
                             uint64_t seed,
                             uint64_t *out_z,
                             size_t len,
                             double *out_squared_error);

// Lattice rule estimate of a built-in test function (`"f1"` to `"f4"`) in
// the rule's dimension. `shift` is null or points to `dim` values.
//
// # Safety
// `name` must be a NUL-terminated string; `shift` null or readable for `dim`
// values; `out` writable.
enum RanlatStatus ranlat_integrate_test_fn(const char *name,
                                           const struct RanlatRule *rule,
                                           const double *shift,
                                           double *out);

// Fills `out` with a uniform random shift in `[0, 1)^len` drawn from `seed`,
// matching the command line tool's `--shift-seed`.
//
// # Safety
// `out` must be writable for `len` values.
enum RanlatStatus ranlat_sample_shift(uint64_t seed, double *out, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RANLAT_H */
