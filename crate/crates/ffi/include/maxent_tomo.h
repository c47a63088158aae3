#ifndef MAXENT_TOMO_H
#define MAXENT_TOMO_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MtStatus {
  MT_STATUS_OK = 0,
  MT_STATUS_NULL_POINTER = 1,
  MT_STATUS_INVALID_ARGUMENT = 2,
  MT_STATUS_DIMENSION = 3,
  MT_STATUS_NOT_DENSITY = 4,
  MT_STATUS_DOMAIN = 5,
  MT_STATUS_NUMERICAL = 6,
  MT_STATUS_BUDGET = 7,
  MT_STATUS_BUFFER_TOO_SMALL = 8,
  MT_STATUS_PANIC = 9,
  MT_STATUS_INTERNAL = 10,
} MtStatus;

typedef enum MtOmega0Mode {
  MT_OMEGA0_MODE_FIXED_ZERO = 0,
  MT_OMEGA0_MODE_ANALYTIC = 1,
  MT_OMEGA0_MODE_FREE = 2,
} MtOmega0Mode;

typedef enum MtTargetKind {
  MT_TARGET_KIND_PURE = 0,
  MT_TARGET_KIND_MIXED = 1,
} MtTargetKind;

typedef struct MtDensityMatrix MtDensityMatrix;

typedef struct MtModelSet MtModelSet;

typedef struct MtObjective MtObjective;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or null. The pointer stays valid until
 * the next failing call on the same thread.
 */
const char *mt_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *mt_version(void);

/**
 * The six smoothed Pauli-eigenstate models, ordered z+, z-, x+, x-, y+, y-.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum MtStatus mt_model_set_pauli(double epsilon, struct MtModelSet **out);

/**
 * Model set built from `count` density matrices, each given as handles.
 *
 * # Safety
 * `states` must point to `count` valid density-matrix handles; `out` must be writable.
 */
enum MtStatus mt_model_set_custom(const struct MtDensityMatrix *const *states,
                                  size_t count,
                                  struct MtModelSet **out);

/**
 * Keeps the models at the given 1-based indices.
 *
 * # Safety
 * `ms` must be a valid handle, `indices` must point to `count` values and `out` must be writable.
 */
enum MtStatus mt_model_set_subset(const struct MtModelSet *ms,
                                  const size_t *indices,
                                  size_t count,
                                  struct MtModelSet **out);

/**
 * Number of models, or 0 for a null handle.
 *
 * # Safety
 * `ms` must be null or a valid handle.
 */
size_t mt_model_set_len(const struct MtModelSet *ms);

/**
 * Hilbert-space dimension, or 0 for a null handle.
 *
 * # Safety
 * `ms` must be null or a valid handle.
 */
size_t mt_model_set_dim(const struct MtModelSet *ms);

/**
 * # Safety
 * `ms` must be null or a handle not yet freed.
 */
void mt_model_set_free(struct MtModelSet *ms);

/**
 * Density matrix from row-major real and imaginary parts (`dim * dim` values each).
 *
 * # Safety
 * `re` and `im` must point to `dim * dim` values; `out` must be writable.
 */
enum MtStatus mt_density_new(size_t dim,
                             const double *re,
                             const double *im,
                             struct MtDensityMatrix **out);

/**
 * Real pure qubit state `cos θ |0⟩ + sin θ |1⟩`.
 *
 * # Safety
 * `out` must be writable.
 */
enum MtStatus mt_target_pure(double theta, struct MtDensityMatrix **out);

/**
 * Random target of the given kind (`MT_TARGET_KIND_PURE` or `MT_TARGET_KIND_MIXED`).
 *
 * # Safety
 * `out` must be writable.
 */
enum MtStatus mt_target_random(size_t dim,
                               uint32_t kind,
                               uint64_t seed,
                               struct MtDensityMatrix **out);

/**
 * Dimension of a density matrix, or 0 for a null handle.
 *
 * # Safety
 * `rho` must be null or a valid handle.
 */
size_t mt_density_dim(const struct MtDensityMatrix *rho);

/**
 * Copies the entries into `re` and `im`, each with room for `capacity` values.
 *
 * # Safety
 * `rho` must be a valid handle; `re` and `im` must point to `capacity` writable values.
 */
enum MtStatus mt_density_entries(const struct MtDensityMatrix *rho,
                                 double *re,
                                 double *im,
                                 size_t capacity);

/**
 * # Safety
 * `rho` must be null or a handle not yet freed.
 */
void mt_density_free(struct MtDensityMatrix *rho);

/**
 * Von Neumann entropy in nats.
 *
 * # Safety
 * `rho` must be a valid handle and `out` writable.
 */
enum MtStatus mt_entropy(const struct MtDensityMatrix *rho, double *out);

/**
 * Uhlmann fidelity `(tr √(√a b √a))²`.
 *
 * # Safety
 * `a` and `b` must be valid handles and `out` writable.
 */
enum MtStatus mt_fidelity(const struct MtDensityMatrix *a,
                          const struct MtDensityMatrix *b,
                          double *out);

/**
 * The normalized state `exp(Σ ωᵢ ηᵢ) / tr exp(Σ ωᵢ ηᵢ)`.
 *
 * # Safety
 * `ms` must be a valid handle, `omegas` must point to `count` values and `out` must be writable.
 */
enum MtStatus mt_rho_normalized(const struct MtModelSet *ms,
                                const double *omegas,
                                size_t count,
                                struct MtDensityMatrix **out);

/**
 * Objective `E(ω)` for a model set and target. `mode` is an `MtOmega0Mode` value.
 *
 * # Safety
 * `ms` and `target` must be valid handles and `out` writable.
 */
enum MtStatus mt_objective_new(const struct MtModelSet *ms,
                               const struct MtDensityMatrix *target,
                               double alpha,
                               uint32_t mode,
                               struct MtObjective **out);

/**
 * Number of searched parameters, or 0 for a null handle.
 *
 * # Safety
 * `obj` must be null or a valid handle.
 */
size_t mt_objective_num_params(const struct MtObjective *obj);

/**
 * # Safety
 * `obj` must be a valid handle, `params` must point to `count` values and `out` be writable.
 */
enum MtStatus mt_objective_evaluate(const struct MtObjective *obj,
                                    const double *params,
                                    size_t count,
                                    double *out);

/**
 * Fidelity between the target and the normalized reconstruction at `params`.
 *
 * # Safety
 * `obj` must be a valid handle, `params` must point to `count` values and `out` be writable.
 */
enum MtStatus mt_objective_fidelity(const struct MtObjective *obj,
                                    const double *params,
                                    size_t count,
                                    double *out);

/**
 * Uniform random search over `bits`-bit sign-magnitude codes in `[-omega_max, omega_max]`.
 * The best parameters are written to `best_params`, which must hold `capacity` values.
 *
 * # Safety
 * `obj` must be a valid handle; `best_params` must point to `capacity` writable values and
 * `best_e` must be writable.
 */
enum MtStatus mt_random_search(const struct MtObjective *obj,
                               uint32_t bits,
                               double omega_max,
                               uint64_t budget,
                               uint64_t seed,
                               double *best_params,
                               size_t capacity,
                               double *best_e);

/**
 * # Safety
 * `obj` must be null or a handle not yet freed.
 */
void mt_objective_free(struct MtObjective *obj);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MAXENT_TOMO_H */
