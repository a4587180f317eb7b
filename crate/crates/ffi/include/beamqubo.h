#ifndef BEAMQUBO_H
#define BEAMQUBO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Backend selectors for [`bq_solve`].
 */
#define BQ_BACKEND_EXACT 0

#define BQ_BACKEND_ANNEALING 1

/**
 * User in no beam.
 */
#define BQ_NO_BEAM UINT32_MAX

typedef enum {
  BQ_STATUS_OK = 0,
  BQ_STATUS_NULL_POINTER = 1,
  BQ_STATUS_INVALID_ARGUMENT = 2,
  BQ_STATUS_CAPACITY = 3,
  BQ_STATUS_INFEASIBLE = 4,
  BQ_STATUS_RUNTIME = 5,
  BQ_STATUS_PANIC = 6,
} BqStatus;

/**
 * A beam placement problem: proximity graph, beam budget and capacity.
 */
typedef struct BqInstance BqInstance;

/**
 * Presolve result together with the instance it was computed for.
 */
typedef struct BqPresolve BqPresolve;

typedef struct BqQubo BqQubo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *bq_last_error_message(void);

/**
 * Number of QUBO variables `N*B + B + B*W`.
 */
size_t bq_qubit_count(size_t users, size_t beams, size_t capacity);

/**
 * Builds an instance from an explicit edge list. `edges` holds `2 * n_edges`
 * user indices, one pair per edge. `beams == 0` means one beam per user.
 *
 * # Safety
 * `edges` must point to `2 * n_edges` readable values (or be NULL when
 * `n_edges == 0`) and `out` must be writable.
 */
BqStatus bq_instance_new(size_t users,
                         const uint32_t *edges,
                         size_t n_edges,
                         size_t beams,
                         size_t capacity,
                         BqInstance **out);

/**
 * Builds an instance from user positions in degrees: two users share an
 * edge when the satellite sees them within `alpha_deg` of each other.
 * Satellite altitude is in km. `beams == 0` means one beam per user.
 *
 * # Safety
 * `latitudes` and `longitudes` must each point to `users` readable values
 * and `out` must be writable.
 */
BqStatus bq_instance_from_positions(size_t users,
                                    const double *latitudes,
                                    const double *longitudes,
                                    double sat_latitude,
                                    double sat_longitude,
                                    double sat_altitude_km,
                                    double alpha_deg,
                                    size_t beams,
                                    size_t capacity,
                                    BqInstance **out);

/**
 * # Safety
 * `inst` must be NULL or a handle from this library not yet freed.
 */
void bq_instance_free(BqInstance *inst);

/**
 * # Safety
 * `inst` must be a live handle; the out pointers must be writable.
 */
BqStatus bq_instance_shape(const BqInstance *inst,
                           size_t *users,
                           size_t *edges,
                           size_t *beams,
                           size_t *capacity);

/**
 * Full QUBO of the instance. `lambda <= 0` selects the default `B + 1`.
 *
 * # Safety
 * `inst` must be a live handle and `out` writable.
 */
BqStatus bq_qubo_build(const BqInstance *inst, double lambda, BqQubo **out);

/**
 * # Safety
 * `q` must be NULL or a handle from this library not yet freed.
 */
void bq_qubo_free(BqQubo *q);

/**
 * Variable count, or 0 for NULL.
 *
 * # Safety
 * `q` must be NULL or a live handle.
 */
size_t bq_qubo_size(const BqQubo *q);

/**
 * Constant term, or 0 for NULL.
 *
 * # Safety
 * `q` must be NULL or a live handle.
 */
double bq_qubo_offset(const BqQubo *q);

/**
 * Energy of `bits` (one byte per variable, 0 or 1) including the offset.
 *
 * # Safety
 * `q` must be a live handle, `bits` must hold `len` bytes and `energy`
 * must be writable.
 */
BqStatus bq_qubo_energy(const BqQubo *q, const uint8_t *bits, size_t len, double *energy);

/**
 * Text form: a `size offset` header, then `i j value` lines.
 * Release the string with [`bq_string_free`].
 *
 * # Safety
 * `q` must be a live handle and `out` writable.
 */
BqStatus bq_qubo_to_text(const BqQubo *q, char **out);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library not yet freed.
 */
void bq_string_free(char *s);

/**
 * Runs the independent-set and LP presolve.
 *
 * # Safety
 * `inst` must be a live handle and `out` writable.
 */
BqStatus bq_presolve(const BqInstance *inst, bool allow_active_beam_join, BqPresolve **out);

/**
 * # Safety
 * `p` must be NULL or a handle from this library not yet freed.
 */
void bq_presolve_free(BqPresolve *p);

/**
 * # Safety
 * `p` must be a live handle; the out pointers must be writable.
 */
BqStatus bq_presolve_summary(const BqPresolve *p,
                             double *lp_lower_bound,
                             size_t *active_beams,
                             size_t *unassigned_users,
                             size_t *free_variables);

/**
 * Presolve report as JSON. Release with [`bq_string_free`].
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
BqStatus bq_presolve_report(const BqPresolve *p, char **out);

/**
 * Reduced Hamiltonian over the variables presolve left free. Fails with
 * `BQ_STATUS_INVALID_ARGUMENT` when presolve placed every user.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
BqStatus bq_presolve_reduced_qubo(const BqPresolve *p, BqQubo **out);

/**
 * Best Fit in input order. `beam_of`, when not NULL, receives each user's
 * beam and must hold one entry per user.
 *
 * # Safety
 * `inst` must be a live handle, `objective` writable and `beam_of` NULL or
 * writable for `users` entries.
 */
BqStatus bq_best_fit(const BqInstance *inst, size_t *objective, uint32_t *beam_of);

/**
 * Presolve, solve what is left with `backend`, merge. For the annealer,
 * zero `sweeps` or `reads` select the defaults. A merged placement that
 * breaks a constraint is still returned, with `feasible` set to false.
 *
 * # Safety
 * `inst` must be a live handle, `objective` and `feasible` writable and
 * `beam_of` NULL or writable for `users` entries.
 */
BqStatus bq_solve(const BqInstance *inst,
                  uint32_t backend,
                  size_t sweeps,
                  size_t reads,
                  uint64_t seed,
                  bool allow_active_beam_join,
                  size_t *objective,
                  bool *feasible,
                  uint32_t *beam_of);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BEAMQUBO_H */
