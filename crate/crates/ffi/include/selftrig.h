#ifndef SELFTRIG_H
#define SELFTRIG_H

#include <stddef.h>
#include <stdint.h>
#include <stdbool.h>

typedef enum SelftrigStatus {
  SELFTRIG_STATUS_OK = 0,
  SELFTRIG_STATUS_NULL_POINTER = 1,
  SELFTRIG_STATUS_INVALID_ARGUMENT = 2,
  SELFTRIG_STATUS_CONFIG = 3,
  SELFTRIG_STATUS_DESIGN = 4,
  SELFTRIG_STATUS_SIMULATION = 5,
  SELFTRIG_STATUS_BUFFER_TOO_SMALL = 6,
  SELFTRIG_STATUS_PANIC = 7,
} SelftrigStatus;

/**
 * Design handle. Create with `selftrig_design_new` or
 * `selftrig_design_from_config`, release with `selftrig_design_free`.
 */
typedef struct SelftrigDesign SelftrigDesign;

/**
 * Result of one Γ_d evaluation.
 */
typedef struct SelftrigDecision {
  size_t n_k;
  double tau_k;
  size_t evaluations;
  size_t op_count;
} SelftrigDecision;

/**
 * Summary of a self-triggered simulation.
 */
typedef struct SelftrigRunStats {
  size_t executions;
  double min_tau;
  double mean_tau;
  double max_tau;
  size_t eiss_violations;
  size_t lemma2_violations;
} SelftrigRunStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Designs a self-triggered implementation for ẋ = Ax + BKx(t_k).
 *
 * `a` is m×m, `b` is m×l, `k` is l×m. `q` may be null for the identity.
 * `tau_min <= 0` selects the largest certified value. `decay_exponent` is
 * 1 or 2.
 *
 * # Safety
 * Matrix pointers must reference arrays of the stated sizes; `out` must be
 * writable.
 */
enum SelftrigStatus selftrig_design_new(const double *a,
                                        const double *b,
                                        const double *k,
                                        size_t m,
                                        size_t l,
                                        const double *q,
                                        double lambda_ratio,
                                        double delta,
                                        double tau_max,
                                        double tau_min,
                                        uint32_t decay_exponent,
                                        struct SelftrigDesign **out);

/**
 * Designs from a JSON experiment configuration given as text.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string; `out` must be writable.
 */
enum SelftrigStatus selftrig_design_from_config(const char *config_json,
                                                struct SelftrigDesign **out);

/**
 * # Safety
 * `design` must come from this library and not be used afterwards.
 */
void selftrig_design_free(struct SelftrigDesign *design);

/**
 * # Safety
 * `design` must be a live handle.
 */
size_t selftrig_design_dim(const struct SelftrigDesign *design);

/**
 * τ*_min; NaN for a null handle.
 *
 * # Safety
 * `design` must be null or a live handle.
 */
double selftrig_design_tau_star(const struct SelftrigDesign *design);

/**
 * τ_min; NaN for a null handle.
 *
 * # Safety
 * `design` must be null or a live handle.
 */
double selftrig_design_tau_min(const struct SelftrigDesign *design);

/**
 * τ_max; NaN for a null handle.
 *
 * # Safety
 * `design` must be null or a live handle.
 */
double selftrig_design_tau_max(const struct SelftrigDesign *design);

/**
 * Δ; NaN for a null handle.
 *
 * # Safety
 * `design` must be null or a live handle.
 */
double selftrig_design_delta(const struct SelftrigDesign *design);

/**
 * λ; NaN for a null handle.
 *
 * # Safety
 * `design` must be null or a live handle.
 */
double selftrig_design_lambda(const struct SelftrigDesign *design);

/**
 * λ_o; NaN for a null handle.
 *
 * # Safety
 * `design` must be null or a live handle.
 */
double selftrig_design_lambda_o(const struct SelftrigDesign *design);

/**
 * σ; NaN for a null handle.
 *
 * # Safety
 * `design` must be null or a live handle.
 */
double selftrig_design_sigma(const struct SelftrigDesign *design);

/**
 * Coefficient of ‖δ‖∞ in the gain γ; NaN for a null handle.
 *
 * # Safety
 * `design` must be null or a live handle.
 */
double selftrig_design_gamma_total_coeff(const struct SelftrigDesign *design);

/**
 * Writes N_min and N_max.
 *
 * # Safety
 * `design` must be a live handle; outputs must be writable.
 */
enum SelftrigStatus selftrig_design_grid(const struct SelftrigDesign *design,
                                         size_t *n_min,
                                         size_t *n_max);

/**
 * Copies P (m×m, row-major) into `out`, which holds `len` doubles.
 *
 * # Safety
 * `out` must hold `len` writable doubles.
 */
enum SelftrigStatus selftrig_design_p(const struct SelftrigDesign *design, double *out, size_t len);

/**
 * Serializes the design report as JSON into `buf` (NUL-terminated).
 * `needed` receives the required size including the terminator, so a
 * first call with `buf_len = 0` can size the buffer.
 *
 * # Safety
 * `buf` must hold `buf_len` writable bytes (or be null when `buf_len` is 0).
 */
enum SelftrigStatus selftrig_design_to_json(const struct SelftrigDesign *design,
                                            char *buf,
                                            size_t buf_len,
                                            size_t *needed);

/**
 * Next inter-execution time for the measured state `x` (length m).
 *
 * # Safety
 * `x` must hold m doubles; `out` must be writable.
 */
enum SelftrigStatus selftrig_gamma_d(const struct SelftrigDesign *design,
                                     const double *x,
                                     size_t len,
                                     struct SelftrigDecision *out);

/**
 * As `selftrig_gamma_d`, through the packed monomial tables.
 *
 * # Safety
 * As `selftrig_gamma_d`.
 */
enum SelftrigStatus selftrig_gamma_d_veronese(const struct SelftrigDesign *design,
                                              const double *x,
                                              size_t len,
                                              struct SelftrigDecision *out);

/**
 * xᵀQ_n x for 0 ≤ n ≤ N_max.
 *
 * # Safety
 * `x` must hold m doubles; `out` must be writable.
 */
enum SelftrigStatus selftrig_h_d(const struct SelftrigDesign *design,
                                 const double *x,
                                 size_t len,
                                 size_t n,
                                 double *out);

/**
 * Whether a platform with instruction time `tau_c` can run the trigger.
 *
 * # Safety
 * `feasible` must be writable.
 */
enum SelftrigStatus selftrig_feasibility(const struct SelftrigDesign *design,
                                         double tau_c,
                                         bool *feasible);

/**
 * Simulates the self-triggered loop from `x0` over [0, t_end].
 * `disturbance_kind`: 0 zero, 1 constant, 2 sinusoid, 3 bounded noise.
 *
 * # Safety
 * `x0` must hold m doubles; `out` must be writable.
 */
enum SelftrigStatus selftrig_simulate(const struct SelftrigDesign *design,
                                      const double *x0,
                                      size_t len,
                                      double t_end,
                                      size_t integrator_divisor,
                                      uint32_t disturbance_kind,
                                      double amplitude,
                                      double frequency,
                                      uint64_t seed,
                                      struct SelftrigRunStats *out);

/**
 * Copies the last error message of the calling thread into `buf`
 * (NUL-terminated, truncated to fit). Returns the full message length.
 *
 * # Safety
 * `buf` must hold `buf_len` writable bytes or be null.
 */
size_t selftrig_last_error_message(char *buf, size_t buf_len);

/**
 * Static, NUL-terminated version string.
 */
const char *selftrig_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SELFTRIG_H */
