#ifndef STRATALLOC_H
#define STRATALLOC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum StratStatus {
  STRAT_STATUS_OK = 0,
  STRAT_STATUS_NULL_POINTER = 1,
  STRAT_STATUS_INVALID_ARGUMENT = 2,
  STRAT_STATUS_LENGTH_MISMATCH = 3,
  STRAT_STATUS_DOMAIN = 4,
  STRAT_STATUS_BUFFER_TOO_SMALL = 5,
  STRAT_STATUS_PANIC = 6,
} StratStatus;

typedef enum StratScheme {
  STRAT_SCHEME_MINIMAX = 0,
  STRAT_SCHEME_PROPORTIONAL = 1,
  STRAT_SCHEME_EGALITARIAN = 2,
  STRAT_SCHEME_NEYMAN = 3,
} StratScheme;

typedef enum StratParadigm {
  STRAT_PARADIGM_SEPARATE = 0,
  STRAT_PARADIGM_JOINT = 1,
  STRAT_PARADIGM_EGALITARIAN = 2,
} StratParadigm;

/**
 * Opaque design problem.
 */
typedef struct StratProblem StratProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a problem with `num_groups` groups. Weights must sum to one and
 * variances must be positive.
 *
 * # Safety
 * The three arrays hold `num_groups` readable doubles; `out` is writable.
 */
enum StratStatus strat_problem_new(uint64_t budget,
                                   size_t num_groups,
                                   const double *weights,
                                   const double *var_control,
                                   const double *var_treated,
                                   struct StratProblem **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `problem` is null or came from [`strat_problem_new`] and is not used again.
 */
void strat_problem_free(struct StratProblem *problem);

/**
 * # Safety
 * `problem` is a live handle; `out` is writable.
 */
enum StratStatus strat_problem_num_groups(const struct StratProblem *problem, size_t *out);

/**
 * Writes the scheme's even per-group counts into `counts_out`.
 *
 * # Safety
 * `problem` is a live handle; `counts_out` holds `len` writable slots.
 */
enum StratStatus strat_allocate(const struct StratProblem *problem,
                                enum StratScheme scheme,
                                uint64_t *counts_out,
                                size_t len);

/**
 * Worst-case expected regret of an allocation; infinity when unbounded.
 *
 * # Safety
 * `problem` is a live handle; `counts` holds `len` values; `out` is writable.
 */
enum StratStatus strat_worst_case(const struct StratProblem *problem,
                                  const uint64_t *counts,
                                  size_t len,
                                  enum StratParadigm paradigm,
                                  double *out);

/**
 * Expected regret when the effects are `tau` (one per group).
 *
 * # Safety
 * As [`strat_worst_case`]; `tau` holds one double per group and
 * `baseline` is null or holds one double per group.
 */
enum StratStatus strat_expected_regret(const struct StratProblem *problem,
                                       const uint64_t *counts,
                                       size_t len,
                                       const double *tau,
                                       const double *baseline,
                                       enum StratParadigm paradigm,
                                       double *out);

/**
 * Simulated expected regret: mean and standard error over `replications`
 * trials seeded from `seed`. Results do not depend on thread count.
 *
 * # Safety
 * As [`strat_expected_regret`]; `mean_out` and `se_out` are writable.
 */
enum StratStatus strat_monte_carlo(const struct StratProblem *problem,
                                   const uint64_t *counts,
                                   size_t len,
                                   const double *tau,
                                   const double *baseline,
                                   enum StratParadigm paradigm,
                                   uint64_t replications,
                                   uint64_t seed,
                                   double *mean_out,
                                   double *se_out);

/**
 * The regret-maximizing threshold `t*` and the constant `C0 = t* sf(t*)`.
 *
 * # Safety
 * Both pointers are writable.
 */
enum StratStatus strat_threshold_constants(double *t_star_out, double *c0_out);

/**
 * Copies the calling thread's last error message (empty after a success)
 * into `buf`, truncating to `cap - 1` bytes plus a NUL. Returns the size
 * needed for the whole message including the NUL.
 *
 * # Safety
 * `buf` is null (with `cap` 0) or holds `cap` writable bytes.
 */
size_t strat_last_error_message(char *buf, size_t cap);

/**
 * Library version as a static NUL-terminated string.
 */
const char *strat_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STRATALLOC_H */
