#ifndef EQUIPOT_H
#define EQUIPOT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes for every fallible entry point.
 */
typedef enum EqpStatus {
  /**
   * Success.
   */
  EQP_STATUS_OK = 0,
  /**
   * A pointer argument was null.
   */
  EQP_STATUS_NULL_POINTER = 1,
  /**
   * An argument failed validation (bad radius, k out of range, ...).
   */
  EQP_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The solve failed numerically (indefinite form, no convergence).
   */
  EQP_STATUS_NUMERICAL_FAILURE = 3,
} EqpStatus;

/**
 * Opaque handle to a solved equilibrium; create with
 * [`eqp_equilibrium_solve_ball`], release with [`eqp_equilibrium_free`].
 */
typedef struct EqpEquilibrium EqpEquilibrium;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code; never null, never freed.
 */
const char *eqp_status_message(enum EqpStatus status);

/**
 * Closed-form ball equilibrium: constant potential `a`, interior charge
 * `q_interior`, surface charge `q_hat`, for a ball of radius `r` with
 * total charge `q` and screening constant `k`.
 *
 * # Safety
 * `a`, `q_interior`, and `q_hat` must each be null or valid for writing
 * one `double`.
 */
enum EqpStatus eqp_ball_closed_form(double r,
                                    double q,
                                    double k,
                                    double *a,
                                    double *q_interior,
                                    double *q_hat);

/**
 * Numerical capacity of a ball on a uniform radial grid.
 *
 * # Safety
 * `out` must be null or valid for writing one `double`.
 */
enum EqpStatus eqp_capacity_ball(double radius, double r_max, size_t nodes, double *out);

/**
 * Poincare-type constant of a ball (radial discretization, default grid).
 *
 * # Safety
 * `out` must be null or valid for writing one `double`.
 */
enum EqpStatus eqp_poincare_constant_ball(double radius, double *out);

/**
 * Electron-pair stability parameter t.
 *
 * # Safety
 * `out` and `in_range` must each be null or valid for writing.
 */
enum EqpStatus eqp_pair_parameter_t(double r, double delta, double k, double *out, bool *in_range);

/**
 * Minimal photon energy for ejecting the electron pair across the gap.
 *
 * # Safety
 * `out` must be null or valid for writing one `double`.
 */
enum EqpStatus eqp_threshold_energy(double r, double delta, double q, double e, double *out);

/**
 * Solves the ball equilibrium numerically and returns an owned handle.
 *
 * # Safety
 * `out` must be null or valid for writing one pointer. On `EQP_OK` the
 * caller owns the handle and must release it with
 * [`eqp_equilibrium_free`].
 */
enum EqpStatus eqp_equilibrium_solve_ball(double radius,
                                          double q,
                                          double k,
                                          double r_max,
                                          size_t nodes,
                                          struct EqpEquilibrium **out);

/**
 * Constant conductor potential A of a solved equilibrium.
 *
 * # Safety
 * `handle` must be null or a live pointer from
 * [`eqp_equilibrium_solve_ball`]. Null returns NaN.
 */
double eqp_equilibrium_a(const struct EqpEquilibrium *handle);

/**
 * Interior (volume) charge total Q.
 *
 * # Safety
 * As for [`eqp_equilibrium_a`].
 */
double eqp_equilibrium_interior_charge(const struct EqpEquilibrium *handle);

/**
 * Surface charge total q_hat.
 *
 * # Safety
 * As for [`eqp_equilibrium_a`].
 */
double eqp_equilibrium_surface_charge(const struct EqpEquilibrium *handle);

/**
 * Equilibrium energy W = qA.
 *
 * # Safety
 * As for [`eqp_equilibrium_a`].
 */
double eqp_equilibrium_energy(const struct EqpEquilibrium *handle);

/**
 * Potential U(rho) of the solved equilibrium (exact 1/rho tail beyond
 * the grid).
 *
 * # Safety
 * `handle` as for [`eqp_equilibrium_a`]; `out` must be null or valid
 * for writing one `double`.
 */
enum EqpStatus eqp_equilibrium_potential_at(const struct EqpEquilibrium *handle,
                                            double rho,
                                            double *out);

/**
 * Releases a handle from [`eqp_equilibrium_solve_ball`]; null is a no-op.
 *
 * # Safety
 * `handle` must be null or a live pointer from
 * [`eqp_equilibrium_solve_ball`], not freed before, and unused after.
 */
void eqp_equilibrium_free(struct EqpEquilibrium *handle);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* EQUIPOT_H */
