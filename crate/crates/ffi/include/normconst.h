#ifndef NORMCONST_H
#define NORMCONST_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Truncation policy selector.
typedef enum NcPolicy {
  NC_POLICY_FIXED_P = 0,
  NC_POLICY_HIGH_DIM = 1,
} NcPolicy;

// Regime selector for rate and crossover functions.
typedef enum NcRegime {
  NC_REGIME_FIXED_P = 0,
  NC_REGIME_HIGH_DIM = 1,
  NC_REGIME_GAUSSIAN_SPECIAL = 2,
  NC_REGIME_CLASSICAL = 3,
} NcRegime;

// Status codes returned by every fallible call.
typedef enum NcStatus {
  NC_STATUS_OK = 0,
  NC_STATUS_INVALID_ARGUMENT = 1,
  NC_STATUS_DIMENSION_MISMATCH = 2,
  NC_STATUS_BUDGET_EXCEEDED = 3,
  NC_STATUS_NUMERICAL = 4,
  NC_STATUS_IO = 5,
  NC_STATUS_NULL_POINTER = 6,
  NC_STATUS_PANIC = 7,
} NcStatus;

// `t(n)` selector; `Fixed` reads the accompanying value.
typedef enum NcTKind {
  NC_T_KIND_THEOREM = 0,
  NC_T_KIND_SQRT_LOG = 1,
  NC_T_KIND_LOG = 2,
  NC_T_KIND_FIXED = 3,
} NcTKind;

// A conjugate Gaussian posterior with its closed-form normalizer.
typedef struct NcGaussianModel NcGaussianModel;

// An immutable point set in `[0,1)^p`.
typedef struct NcPointSet NcPointSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length excluding the NUL.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t nc_last_error_message(char *buf, size_t len);

// First `m` Halton points in dimension `p` starting at `start_index`.
//
// # Safety
// `out` must be a valid pointer to writable storage for a handle.
enum NcStatus nc_halton_new(size_t m, size_t p, uint64_t start_index, struct NcPointSet **out);

// `m` seeded uniform points in dimension `p`.
//
// # Safety
// `out` must be a valid pointer to writable storage for a handle.
enum NcStatus nc_uniform_new(size_t m, size_t p, uint64_t seed, struct NcPointSet **out);

// Point set from `m * p` row-major coordinates in `[0,1)`.
//
// # Safety
// `coords` must point to `m * p` readable doubles; `out` must be writable.
enum NcStatus nc_point_set_from_coords(const double *coords,
                                       size_t m,
                                       size_t p,
                                       struct NcPointSet **out);

// # Safety
// `ps` must be null or a handle from this library not yet freed.
void nc_point_set_free(struct NcPointSet *ps);

// Number of points, or 0 for a null handle.
//
// # Safety
// `ps` must be null or a live handle.
size_t nc_point_set_m(const struct NcPointSet *ps);

// Dimension, or 0 for a null handle.
//
// # Safety
// `ps` must be null or a live handle.
size_t nc_point_set_p(const struct NcPointSet *ps);

// Copies the row-major coordinates into `buf`, which must hold `m * p` doubles.
//
// # Safety
// `ps` must be a live handle and `buf` must point to `len` writable doubles.
enum NcStatus nc_point_set_copy(const struct NcPointSet *ps, double *buf, size_t len);

// Exact star discrepancy; brute force refuses work above `budget`
// (`budget <= 0` selects the default).
//
// # Safety
// `ps` must be a live handle and `out` writable.
enum NcStatus nc_star_discrepancy(const struct NcPointSet *ps, double budget, double *out);

// Explicit upper bound on the star discrepancy of `m` Halton points.
//
// # Safety
// `out` must be writable.
enum NcStatus nc_halton_bound(size_t m, size_t p, double *out);

// Simulates `n` observations from `N(0, I_p)` and builds the posterior.
//
// # Safety
// `out` must be writable.
enum NcStatus nc_gaussian_simulate(size_t n,
                                   size_t p,
                                   double sigma,
                                   double sigma_p,
                                   uint64_t seed,
                                   struct NcGaussianModel **out);

// Builds the posterior from `n * p` row-major observations.
//
// # Safety
// `data` must point to `n * p` readable doubles; `out` must be writable.
enum NcStatus nc_gaussian_from_data(const double *data,
                                    size_t n,
                                    size_t p,
                                    double sigma,
                                    double sigma_p,
                                    struct NcGaussianModel **out);

// # Safety
// `model` must be null or a live handle.
void nc_gaussian_free(struct NcGaussianModel *model);

// Exact mode-relative log normalizer.
//
// # Safety
// `model` must be a live handle and `out` writable.
enum NcStatus nc_gaussian_oracle_log(const struct NcGaussianModel *model, double *out);

// Truncated estimate of the mode-relative log normalizer on the cube
// around the mode. `use_likelihood_curvature` selects `η = 1/σ²` for the
// radius instead of the posterior curvature. `out_rel_error` may be null.
//
// # Safety
// Handles must be live; `out_log` writable; `out_rel_error` null or writable.
enum NcStatus nc_gaussian_estimate(const struct NcGaussianModel *model,
                                   const struct NcPointSet *points,
                                   enum NcPolicy policy_kind,
                                   enum NcTKind t_kind,
                                   double t_value,
                                   bool use_likelihood_curvature,
                                   double *out_log,
                                   double *out_rel_error);

// Bell number `B_k` for `k <= 25`.
//
// # Safety
// `out` must be writable.
enum NcStatus nc_bell_number(size_t k, uint64_t *out);

// QMC/MC rate ratio; `out_qmc_wins` is set when the ratio is below one.
//
// # Safety
// Out-pointers must be writable.
enum NcStatus nc_crossover(size_t n,
                           size_t m,
                           size_t p,
                           enum NcRegime regime_kind,
                           double c_const,
                           double *out_ratio,
                           bool *out_qmc_wins);

// Approximate and exact log marginal likelihoods of a simulated Gaussian
// random-intercept model at `theta` (QMC with `m` points per group).
//
// # Safety
// Out-pointers must be writable.
enum NcStatus nc_lmm_log_marginal(size_t k,
                                  size_t ni,
                                  double sigma,
                                  double tau,
                                  double theta0,
                                  uint64_t seed,
                                  double theta,
                                  size_t m,
                                  double *out_approx,
                                  double *out_exact);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NORMCONST_H */
