#ifndef LIFSHITZ_H
#define LIFSHITZ_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result code of every fallible call.
 */
typedef enum LifshitzStatus {
  LIFSHITZ_STATUS_OK = 0,
  LIFSHITZ_STATUS_NULL_POINTER = 1,
  LIFSHITZ_STATUS_INVALID_ARGUMENT = 2,
  LIFSHITZ_STATUS_OUT_OF_SCOPE = 3,
  LIFSHITZ_STATUS_NUMERICAL_FAILURE = 4,
  LIFSHITZ_STATUS_CONFIG_ERROR = 5,
  LIFSHITZ_STATUS_BUFFER_TOO_SMALL = 6,
  LIFSHITZ_STATUS_PANIC = 7,
} LifshitzStatus;

typedef enum LifshitzPredictionKind {
  LIFSHITZ_PREDICTION_KIND_TAIL = 0,
  LIFSHITZ_PREDICTION_KIND_BRACKET = 1,
  LIFSHITZ_PREDICTION_KIND_OUT_OF_SCOPE = 2,
} LifshitzPredictionKind;

/**
 * An impurity potential.
 */
typedef struct LifshitzPotential LifshitzPotential;

/**
 * Monte Carlo samples of `V(0)`.
 */
typedef struct LifshitzSamples LifshitzSamples;

/**
 * Tabulated sandwich bounds for one potential.
 */
typedef struct LifshitzSandwich LifshitzSandwich;

/**
 * Magnetic parameters; `ε₀ = ħ|Q|B/2m`.
 */
typedef struct LifshitzLandau {
  double mass;
  double charge;
  double field;
  double hbar;
} LifshitzLandau;

/**
 * Sandwich bounds on the Laplace transform at one `t`.
 */
typedef struct LifshitzBounds {
  double t;
  double l_u;
  double l_conv;
  double lower;
  double upper;
  double ln_lower;
  double ln_upper;
} LifshitzBounds;

/**
 * `log N(ε₀+E) ∼ −amplitude · E^e_power · |log E|^log_e_power · S(E^slow_arg_power)`.
 *
 * `slow_is_unity` is false when `S` is not identically 1; it is then only
 * reachable through [`lifshitz_predict_log_tail`] or the JSON form.
 */
typedef struct LifshitzTail {
  bool super_gaussian;
  double amplitude;
  double e_power;
  double log_e_power;
  double slow_arg_power;
  bool slow_is_unity;
} LifshitzTail;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static NUL-terminated string.
 */
const char *lifshitz_version(void);

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next call into the library on the same thread.
 */
const char *lifshitz_last_error_message(void);

/**
 * Static description of a status code; takes the integer so that any value is safe.
 */
const char *lifshitz_status_string(int32_t status);

/**
 * Default parameters: `m = |Q| = B = ħ = 1`.
 */
struct LifshitzLandau lifshitz_landau_default(void);

/**
 * Lowest Landau level `ε₀`.
 *
 * # Safety
 * `landau` and `out_value` must be valid pointers or null.
 */
enum LifshitzStatus lifshitz_landau_lowest_level(const struct LifshitzLandau *landau,
                                                 double *out_value);

/**
 * Potential from its JSON form, e.g. `{"family": "gaussian", "g": 1, "lambda": 1}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string or null; `out_potential` a valid pointer or null.
 */
enum LifshitzStatus lifshitz_potential_from_json(const char *json,
                                                 struct LifshitzPotential **out_potential);

/**
 * `g` on the disk of radius `radius`.
 *
 * # Safety
 * `out_potential` must be a valid pointer or null.
 */
enum LifshitzStatus lifshitz_potential_compact_disk(double g,
                                                    double radius,
                                                    struct LifshitzPotential **out_potential);

/**
 * `g exp(−r²/λ²)`.
 *
 * # Safety
 * `out_potential` must be a valid pointer or null.
 */
enum LifshitzStatus lifshitz_potential_gaussian(double g,
                                                double lambda,
                                                struct LifshitzPotential **out_potential);

/**
 * `g exp(−(r/λ)^β)`, `0 < β < 2`.
 *
 * # Safety
 * `out_potential` must be a valid pointer or null.
 */
enum LifshitzStatus lifshitz_potential_stretched_gaussian(double g,
                                                          double lambda,
                                                          double beta,
                                                          struct LifshitzPotential **out_potential);

/**
 * `g0 r^{−α}`, `α > 2`.
 *
 * # Safety
 * `out_potential` must be a valid pointer or null.
 */
enum LifshitzStatus lifshitz_potential_algebraic(double g0,
                                                 double alpha,
                                                 struct LifshitzPotential **out_potential);

/**
 * Releases a potential; null is ignored.
 *
 * # Safety
 * `potential` must come from a constructor of this library and not be used afterwards.
 */
void lifshitz_potential_free(struct LifshitzPotential *potential);

/**
 * `U(r)`.
 *
 * # Safety
 * Pointers must be valid or null.
 */
enum LifshitzStatus lifshitz_potential_evaluate(const struct LifshitzPotential *potential,
                                                double r,
                                                double *out_value);

/**
 * `L_U(t) = 2π∫(1 − e^{−tU(r)}) r dr` with its error estimate.
 *
 * # Safety
 * Pointers must be valid or null; `out_error` may be null.
 */
enum LifshitzStatus lifshitz_laplace_functional(const struct LifshitzPotential *potential,
                                                double t,
                                                double *out_value,
                                                double *out_error);

/**
 * Tabulates the convolved profile once for all `t ≤ t_max`.
 *
 * # Safety
 * Pointers must be valid or null.
 */
enum LifshitzStatus lifshitz_sandwich_new(const struct LifshitzPotential *potential,
                                          const struct LifshitzLandau *landau,
                                          double rho,
                                          double t_max,
                                          struct LifshitzSandwich **out_sandwich);

/**
 * Bounds at `t ≤ t_max`.
 *
 * # Safety
 * Pointers must be valid or null.
 */
enum LifshitzStatus lifshitz_sandwich_at(const struct LifshitzSandwich *sandwich,
                                         double t,
                                         struct LifshitzBounds *out_bounds);

/**
 * # Safety
 * `sandwich` must come from [`lifshitz_sandwich_new`] and not be used afterwards.
 */
void lifshitz_sandwich_free(struct LifshitzSandwich *sandwich);

/**
 * Classifies the potential and predicts the tail. A single tail is written to
 * both `out_lower` and `out_upper`; a Gaussian bracket to each side. Out of
 * scope returns `OutOfScope` with `out_kind` set.
 *
 * # Safety
 * Pointers must be valid or null.
 */
enum LifshitzStatus lifshitz_predict(const struct LifshitzPotential *potential,
                                     const struct LifshitzLandau *landau,
                                     double rho,
                                     bool sharp,
                                     enum LifshitzPredictionKind *out_kind,
                                     struct LifshitzTail *out_lower,
                                     struct LifshitzTail *out_upper);

/**
 * The predicted `log N(ε₀+E)` at `0 < E < 1`, both sides of a bracket.
 *
 * # Safety
 * Pointers must be valid or null.
 */
enum LifshitzStatus lifshitz_predict_log_tail(const struct LifshitzPotential *potential,
                                              const struct LifshitzLandau *landau,
                                              double rho,
                                              double e,
                                              double *out_lower,
                                              double *out_upper);

/**
 * The prediction as JSON. Writes at most `capacity` bytes including the NUL and
 * stores the required size in `out_needed`; returns `BufferTooSmall` if it did not fit.
 *
 * # Safety
 * `buffer` must hold `capacity` bytes or be null with `capacity == 0`.
 */
enum LifshitzStatus lifshitz_predict_json(const struct LifshitzPotential *potential,
                                          const struct LifshitzLandau *landau,
                                          double rho,
                                          bool sharp,
                                          char *buffer,
                                          size_t capacity,
                                          size_t *out_needed);

/**
 * `C(α, ρ)` of the power-law tail.
 *
 * # Safety
 * `out_value` must be a valid pointer or null.
 */
enum LifshitzStatus lifshitz_constant_c(double alpha, double rho, double *out_value);

/**
 * Draws `n_samples` values of `V(0)` on the disk of radius `radius`.
 * Deterministic in `seed` regardless of thread count.
 *
 * # Safety
 * Pointers must be valid or null.
 */
enum LifshitzStatus lifshitz_samples_new(const struct LifshitzPotential *potential,
                                         double rho,
                                         double radius,
                                         uint64_t seed,
                                         size_t n_samples,
                                         bool mean_field_tail,
                                         struct LifshitzSamples **out_samples);

/**
 * Number of samples held.
 *
 * # Safety
 * `samples` must be valid or null.
 */
size_t lifshitz_samples_len(const struct LifshitzSamples *samples);

/**
 * Copies the sampled `V(0)` into `values`, which holds `len` doubles.
 *
 * # Safety
 * `values` must hold `len` doubles.
 */
enum LifshitzStatus lifshitz_samples_values(const struct LifshitzSamples *samples,
                                            double *values,
                                            size_t len);

/**
 * Classical IDOS `N_c(E)` and its standard error at `n` increasing energies.
 *
 * # Safety
 * `energies`, `out_values` and `out_stderr` must each hold `n` doubles;
 * `out_stderr` may be null.
 */
enum LifshitzStatus lifshitz_samples_idos(const struct LifshitzSamples *samples,
                                          const struct LifshitzLandau *landau,
                                          const double *energies,
                                          size_t n,
                                          double *out_values,
                                          double *out_stderr);

/**
 * # Safety
 * `samples` must come from [`lifshitz_samples_new`] and not be used afterwards.
 */
void lifshitz_samples_free(struct LifshitzSamples *samples);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LIFSHITZ_H */
