#ifndef SCHWARZ_FFI_H
#define SCHWARZ_FFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SchwarzStatus {
  SCHWARZ_STATUS_OK = 0,
  SCHWARZ_STATUS_NULL_POINTER = 1,
  SCHWARZ_STATUS_INVALID_ARGUMENT = 2,
  SCHWARZ_STATUS_DIMENSION_MISMATCH = 3,
  SCHWARZ_STATUS_SINGULAR = 4,
  SCHWARZ_STATUS_CONFIG = 5,
  SCHWARZ_STATUS_PARSE = 6,
  SCHWARZ_STATUS_IO = 7,
  /**
   * Breakdown inside a Krylov method, e.g. a non-SPD operator in CG.
   */
  SCHWARZ_STATUS_NUMERICAL = 8,
  SCHWARZ_STATUS_PANIC = 9,
} SchwarzStatus;

typedef enum SchwarzVariant {
  SCHWARZ_VARIANT_AS = 0,
  SCHWARZ_VARIANT_RAS = 1,
  SCHWARZ_VARIANT_SAS = 2,
  SCHWARZ_VARIANT_OAS = 3,
  SCHWARZ_VARIANT_ORAS = 4,
} SchwarzVariant;

/**
 * Complex sparse matrix.
 */
typedef struct SchwarzComplexMatrix SchwarzComplexMatrix;

/**
 * Complex Schwarz preconditioner.
 */
typedef struct SchwarzComplexPreconditioner SchwarzComplexPreconditioner;

/**
 * Parsed experiment configuration.
 */
typedef struct SchwarzExperiment SchwarzExperiment;

/**
 * Real sparse matrix.
 */
typedef struct SchwarzMatrix SchwarzMatrix;

/**
 * Real Schwarz preconditioner.
 */
typedef struct SchwarzPreconditioner SchwarzPreconditioner;

/**
 * Outcome of an iterative solve.
 */
typedef struct SchwarzSolveInfo {
  size_t iterations;
  bool converged;
  /**
   * Last relative residual `||b - A x|| / ||b||`.
   */
  double relative_residual;
  double wall_time;
} SchwarzSolveInfo;

/**
 * One experiment result; missing values are NaN.
 */
typedef struct SchwarzRow {
  size_t ranks;
  size_t dofs;
  size_t k;
  double delta_over_h_pct;
  enum SchwarzVariant variant;
  size_t levels;
  size_t iterations;
  bool converged;
  double kappa;
  double wall_time;
} SchwarzRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next call into this library on the same thread.
 */
const char *schwarz_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *schwarz_version(void);

/**
 * Copies an `n x n` CSR matrix (`row_offsets` has `n + 1` entries, columns
 * strictly increasing within a row).
 *
 * # Safety
 * The arrays must hold `n + 1` and `row_offsets[n]` readable elements.
 */
enum SchwarzStatus schwarz_matrix_new(size_t n,
                                      const size_t *row_offsets,
                                      const size_t *col_indices,
                                      const double *values,
                                      struct SchwarzMatrix **out);

/**
 * Complex version of [`schwarz_matrix_new`]; `values` holds `2 nnz`
 * doubles.
 *
 * # Safety
 * As for [`schwarz_matrix_new`].
 */
enum SchwarzStatus schwarz_complex_matrix_new(size_t n,
                                              const size_t *row_offsets,
                                              const size_t *col_indices,
                                              const double *values,
                                              struct SchwarzComplexMatrix **out);

/**
 * # Safety
 * `m` must come from [`schwarz_matrix_new`] or be NULL.
 */
void schwarz_matrix_free(struct SchwarzMatrix *m);

/**
 * # Safety
 * `m` must come from [`schwarz_complex_matrix_new`] or be NULL.
 */
void schwarz_complex_matrix_free(struct SchwarzComplexMatrix *m);

/**
 * # Safety
 * `m` must be a live handle; `dim` must be writable.
 */
enum SchwarzStatus schwarz_matrix_dim(const struct SchwarzMatrix *m, size_t *dim);

/**
 * Fully algebraic AS/RAS/SAS preconditioner: greedy partition of the
 * matrix graph into `n_parts`, `overlap` layers of graph neighbours, and a
 * coarse level when `levels == 2`. A negative `seed` grows parts from the
 * lowest-numbered free row.
 *
 * # Safety
 * `a` must be a live handle; `out` must be writable.
 */
enum SchwarzStatus schwarz_preconditioner_build(const struct SchwarzMatrix *a,
                                                size_t n_parts,
                                                size_t overlap,
                                                enum SchwarzVariant variant,
                                                size_t levels,
                                                int64_t seed,
                                                struct SchwarzPreconditioner **out);

/**
 * Complex version of [`schwarz_preconditioner_build`].
 *
 * # Safety
 * As for [`schwarz_preconditioner_build`].
 */
enum SchwarzStatus schwarz_complex_preconditioner_build(const struct SchwarzComplexMatrix *a,
                                                        size_t n_parts,
                                                        size_t overlap,
                                                        enum SchwarzVariant variant,
                                                        size_t levels,
                                                        int64_t seed,
                                                        struct SchwarzComplexPreconditioner **out);

/**
 * # Safety
 * `p` must come from [`schwarz_preconditioner_build`] or be NULL.
 */
void schwarz_preconditioner_free(struct SchwarzPreconditioner *p);

/**
 * # Safety
 * `p` must come from [`schwarz_complex_preconditioner_build`] or be NULL.
 */
void schwarz_complex_preconditioner_free(struct SchwarzComplexPreconditioner *p);

/**
 * `z = M^{-1} r` for vectors of length `n`.
 *
 * # Safety
 * `r` and `z` must hold `n` doubles.
 */
enum SchwarzStatus schwarz_preconditioner_apply(const struct SchwarzPreconditioner *p,
                                                size_t n,
                                                const double *r,
                                                double *z);

/**
 * Complex `z = M^{-1} r`; `r` and `z` hold `2 n` doubles.
 *
 * # Safety
 * As for [`schwarz_preconditioner_apply`].
 */
enum SchwarzStatus schwarz_complex_preconditioner_apply(const struct SchwarzComplexPreconditioner *p,
                                                        size_t n,
                                                        const double *r,
                                                        double *z);

/**
 * Right-preconditioned GMRES from a zero initial guess. `m` may be NULL
 * for no preconditioner; `restart == 0` runs full GMRES. Hitting `maxit`
 * is not an error: check `info->converged`.
 *
 * # Safety
 * `b` and `x` must hold `n` doubles; `info` may be NULL.
 */
enum SchwarzStatus schwarz_gmres(const struct SchwarzMatrix *a,
                                 const struct SchwarzPreconditioner *m,
                                 size_t n,
                                 const double *b,
                                 double *x,
                                 double tol,
                                 size_t maxit,
                                 size_t restart,
                                 struct SchwarzSolveInfo *info);

/**
 * Complex version of [`schwarz_gmres`]; `b` and `x` hold `2 n` doubles.
 *
 * # Safety
 * As for [`schwarz_gmres`].
 */
enum SchwarzStatus schwarz_complex_gmres(const struct SchwarzComplexMatrix *a,
                                         const struct SchwarzComplexPreconditioner *m,
                                         size_t n,
                                         const double *b,
                                         double *x,
                                         double tol,
                                         size_t maxit,
                                         size_t restart,
                                         struct SchwarzSolveInfo *info);

/**
 * Parses an experiment configuration from TOML text.
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `out` must be writable.
 */
enum SchwarzStatus schwarz_experiment_from_toml(const char *toml, struct SchwarzExperiment **out);

/**
 * Reads an experiment configuration file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum SchwarzStatus schwarz_experiment_load(const char *path, struct SchwarzExperiment **out);

/**
 * # Safety
 * `e` must come from an experiment constructor or be NULL.
 */
void schwarz_experiment_free(struct SchwarzExperiment *e);

/**
 * Runs the experiment's single solve. With a non-NULL `artifacts_dir`, the
 * solution, residual history, setup report, decomposition and mesh are
 * written there.
 *
 * # Safety
 * `e` must be a live handle, `row` writable, `artifacts_dir` NULL or a
 * NUL-terminated string.
 */
enum SchwarzStatus schwarz_experiment_solve(const struct SchwarzExperiment *e,
                                            const char *artifacts_dir,
                                            struct SchwarzRow *row);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCHWARZ_FFI_H */
