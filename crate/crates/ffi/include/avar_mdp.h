#ifndef AVAR_MDP_H
#define AVAR_MDP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AvarStatus {
  AVAR_STATUS_OK = 0,
  AVAR_STATUS_NULL_POINTER = 1,
  AVAR_STATUS_INVALID_UTF8 = 2,
  AVAR_STATUS_MALFORMED_MODEL = 3,
  AVAR_STATUS_INVALID_MODEL = 4,
  AVAR_STATUS_INVALID_ARGUMENT = 5,
  AVAR_STATUS_OUT_OF_RANGE = 6,
  AVAR_STATUS_CAPACITY_EXCEEDED = 7,
  AVAR_STATUS_SOLVER_FAILURE = 8,
  AVAR_STATUS_IO = 9,
  AVAR_STATUS_PANIC = 10,
} AvarStatus;

// Validated finite model.
typedef struct AvarModel AvarModel;

// Solved AVaR problem: optimal value, budget and budget-dependent policy.
typedef struct AvarSolution AvarSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. The pointer is
// valid until the next failing call on the same thread.
const char *avar_last_error_message(void);

// Static description of a status code.
const char *avar_status_description(enum AvarStatus status);

// Parses and validates a JSON model document.
//
// # Safety
// `json` must be a nul-terminated string and `out_model` a writable pointer.
enum AvarStatus avar_model_from_json(const char *json, struct AvarModel **out_model);

// # Safety
// `model` must come from [`avar_model_from_json`] and not be freed twice.
void avar_model_free(struct AvarModel *model);

// # Safety
// `model` must be a live handle and `out_count` writable.
enum AvarStatus avar_model_state_count(const struct AvarModel *model, uintptr_t *out_count);

// Minimises AVaR of the `horizon`-stage cost from `x0` on a budget grid of
// spacing `s_step` extended by `margin` on both sides.
//
// # Safety
// `model` must be a live handle and `out_solution` writable.
enum AvarStatus avar_solve_finite(const struct AvarModel *model,
                                  uintptr_t x0,
                                  uintptr_t horizon,
                                  double alpha,
                                  double s_step,
                                  double margin,
                                  struct AvarSolution **out_solution);

// Infinite-horizon variant. A NaN `s_max` selects the default grid top.
//
// # Safety
// `model` must be a live handle and `out_solution` writable.
enum AvarStatus avar_solve_infinite(const struct AvarModel *model,
                                    uintptr_t x0,
                                    double alpha,
                                    double s_step,
                                    double margin,
                                    double s_max,
                                    struct AvarSolution **out_solution);

// # Safety
// `solution` must come from a solve call and not be freed twice.
void avar_solution_free(struct AvarSolution *solution);

// Optimal AVaR and the initial budget attaining it.
//
// # Safety
// `solution` must be a live handle; the out pointers must be writable.
enum AvarStatus avar_solution_avar(const struct AvarSolution *solution,
                                   double *out_avar,
                                   double *out_s_star);

// `w(x, s)` of the table the outer minimisation used, interpolated in `s`.
//
// # Safety
// `solution` must be a live handle and `out_value` writable.
enum AvarStatus avar_solution_value(const struct AvarSolution *solution,
                                    uintptr_t state,
                                    double s,
                                    double *out_value);

// Action at decision time `time` in `state` with remaining budget `s`.
//
// # Safety
// `solution` must be a live handle and `out_action` writable.
enum AvarStatus avar_solution_action(const struct AvarSolution *solution,
                                     uintptr_t time,
                                     uintptr_t state,
                                     double s,
                                     uintptr_t *out_action);

// VaR and AVaR of a finite distribution. A null `probabilities` gives every
// value weight `1 / len`.
//
// # Safety
// `values` (and `probabilities` if non-null) must point to `len` doubles.
enum AvarStatus avar_risk_measures(const double *values,
                                   const double *probabilities,
                                   uintptr_t len,
                                   double alpha,
                                   double *out_var,
                                   double *out_avar);

// Writes the Riccati coefficients `K_0 ..= K_N` of the scalar LQ example
// into `out_k`, which must hold at least `horizon + 1` doubles.
//
// # Safety
// `out_k` must point to `len` writable doubles.
enum AvarStatus avar_riccati(uintptr_t horizon, double *out_k, uintptr_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AVAR_MDP_H */
