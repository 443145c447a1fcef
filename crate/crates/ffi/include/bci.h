#ifndef BCI_H
#define BCI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

// Result code of every `bci_*` call.
typedef enum BciStatus {
  BCI_STATUS_OK = 0,
  // A required pointer was null.
  BCI_STATUS_NULL_POINTER = 1,
  BCI_STATUS_INVALID_ANGLE = 2,
  BCI_STATUS_INVALID_TOLERANCE = 3,
  BCI_STATUS_NON_FINITE = 4,
  BCI_STATUS_ZERO_INPUT = 5,
  BCI_STATUS_ON_BRANCH_CUT = 6,
  BCI_STATUS_POLE_HIT = 7,
  BCI_STATUS_ALPHA_ON_CIRCLE = 8,
  BCI_STATUS_ALPHA_ON_CUT = 9,
  BCI_STATUS_INVALID_C = 10,
  BCI_STATUS_OUTSIDE_DISC = 11,
  BCI_STATUS_NO_CONVERGENCE = 12,
  BCI_STATUS_BETA_NON_NEGATIVE_INTEGER = 13,
  BCI_STATUS_INTEGER_BETA = 14,
  BCI_STATUS_INVALID_RATIONAL = 15,
  BCI_STATUS_BETA_MISMATCH = 16,
  BCI_STATUS_SINGULAR_PATH = 17,
  BCI_STATUS_DIVERGENT_AT_ZERO = 18,
  BCI_STATUS_REGIME_STRADDLE = 19,
  BCI_STATUS_NOT_APPLICABLE = 20,
  // A Rust panic was caught at the boundary.
  BCI_STATUS_INTERNAL = 99,
} BciStatus;

typedef enum BciRegime {
  BCI_REGIME_INSIDE = 0,
  BCI_REGIME_OUTSIDE = 1,
} BciRegime;

// Validated problem instance. Create with [`bci_instance_new`], release
// with [`bci_instance_free`].
typedef struct BciInstance BciInstance;

typedef struct BciComplex {
  double re;
  double im;
} BciComplex;

// Value of one method together with its error estimate.
typedef struct BciResult {
  struct BciComplex value;
  double error_estimate;
} BciResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Static, NUL-terminated name of a status code (e.g. `"AlphaOnCircle"`),
// or `"Unknown"` for values that are not a `BciStatus`.
const char *bci_status_name(int status);

// Message for the most recent failed call on this thread, or null when the
// last call succeeded. The pointer stays valid until the next `bci_*` call
// on the same thread.
const char *bci_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *bci_version(void);

// Validates and allocates an instance. `exclusion_band` is the half-width of
// the rejected annulus around `|alpha| = 1` (0.02 is the usual choice).
//
// # Safety
// `out` must be valid for writing one pointer. On success `*out` owns the
// instance and must be released with [`bci_instance_free`].
enum BciStatus bci_instance_new(struct BciComplex alpha,
                                struct BciComplex beta,
                                double theta,
                                double tol,
                                double exclusion_band,
                                struct BciInstance **out);

// Releases an instance. Null is ignored.
//
// # Safety
// `inst` must be null or a pointer from [`bci_instance_new`] that has not
// been freed yet.
void bci_instance_free(struct BciInstance *inst);

// Whether `alpha` lies inside or outside the unit circle.
//
// # Safety
// `inst` must be a live instance; `out` must be valid for one write.
enum BciStatus bci_instance_regime(const struct BciInstance *inst, enum BciRegime *out);

// Closed hypergeometric form (residues for integer `beta`).
//
// # Safety
// `inst` must be a live instance; `out` must be valid for one write.
enum BciStatus bci_eval_theorem(const struct BciInstance *inst, struct BciResult *out);

// Direct power series, `|alpha| < 1` only. `max_terms = 0` uses the default.
//
// # Safety
// `inst` must be a live instance; `out` must be valid for one write.
enum BciStatus bci_eval_series(const struct BciInstance *inst,
                               size_t max_terms,
                               struct BciResult *out);

// Adaptive quadrature around the circle.
//
// # Safety
// `inst` must be a live instance; `out` must be valid for one write.
enum BciStatus bci_eval_quadrature(const struct BciInstance *inst, struct BciResult *out);

// Finite logarithm sum for `beta = m/n`; the instance's `beta` must match.
//
// # Safety
// `inst` must be a live instance; `out` must be valid for one write.
enum BciStatus bci_eval_rational(const struct BciInstance *inst,
                                 int64_t m,
                                 int64_t n,
                                 struct BciResult *out);

// Runs the default methods and returns the JSON report (same layout as
// `bci eval --format jsonl`). Free the string with [`bci_string_free`].
//
// # Safety
// `inst` must be a live instance; `out` must be valid for one write.
enum BciStatus bci_evaluate_json(const struct BciInstance *inst, char **out);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must be null or a string from this library not yet freed.
void bci_string_free(char *s);

// `₂F₁(1, b; 1+b; z)` for `|z| < 1`.
//
// # Safety
// `out` must be valid for one write.
enum BciStatus bci_hyp2f1_one_b(struct BciComplex b,
                                struct BciComplex z,
                                double tol,
                                struct BciResult *out);

// Logarithm with the cut along angle `theta`, `arg ∈ (theta − 2π, theta)`.
//
// # Safety
// `out` must be valid for one write.
enum BciStatus bci_branch_log(struct BciComplex z, double theta, struct BciComplex *out);

// `z^beta` on the branch with the cut along angle `theta`.
//
// # Safety
// `out` must be valid for one write.
enum BciStatus bci_branch_pow(struct BciComplex z,
                              struct BciComplex beta,
                              double theta,
                              struct BciComplex *out);

// Relative residual of the closed form in its differential equation, using
// five-point differences with step `h`.
//
// # Safety
// `inst` must be a live instance; `out` must be valid for one write.
enum BciStatus bci_ode_residual(const struct BciInstance *inst, double h, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BCI_H */
