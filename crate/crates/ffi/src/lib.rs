//! C ABI over the core solvers. All entry points are `eqp_`-prefixed,
//! return an [`EqpStatus`], and write results through out-pointers.
//! Solver state crosses the boundary only as opaque handles; panics are
//! caught and reported as `EQP_NUMERICAL_FAILURE`, never unwound into C.

use std::panic::{catch_unwind, UnwindSafe};

use equipot::domain::{ConductorGeometry, RadialGrid};
use equipot::equilibrium::{ball_closed_form, solve_equilibrium, EquilibriumSolution};
use equipot::functional::{capacity, poincare_constant};
use equipot::photoeffect::{pair_parameter_t, threshold_energy};

/// Status codes for every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EqpStatus {
    /// Success.
    Ok = 0,
    /// A pointer argument was null.
    NullPointer = 1,
    /// An argument failed validation (bad radius, k out of range, ...).
    InvalidArgument = 2,
    /// The solve failed numerically (indefinite form, no convergence).
    NumericalFailure = 3,
}

/// Opaque handle to a solved equilibrium; create with
/// [`eqp_equilibrium_solve_ball`], release with [`eqp_equilibrium_free`].
pub struct EqpEquilibrium {
    solution: EquilibriumSolution,
}

fn status_of(err: &equipot::Error) -> EqpStatus {
    match err {
        equipot::Error::InvalidScenario(_)
        | equipot::Error::DenominatorNonpositive
        | equipot::Error::DegenerateDenominator
        | equipot::Error::OutOfInterval(_)
        | equipot::Error::TOutOfRange(_)
        | equipot::Error::GridMismatch => EqpStatus::InvalidArgument,
        _ => EqpStatus::NumericalFailure,
    }
}

/// Runs `f` with panics converted to a numerical-failure status.
fn guarded(f: impl FnOnce() -> EqpStatus + UnwindSafe) -> EqpStatus {
    catch_unwind(f).unwrap_or(EqpStatus::NumericalFailure)
}

/// Static description of a status code; never null, never freed.
#[no_mangle]
pub extern "C" fn eqp_status_message(status: EqpStatus) -> *const std::os::raw::c_char {
    let text: &'static [u8] = match status {
        EqpStatus::Ok => b"ok\0",
        EqpStatus::NullPointer => b"null pointer argument\0",
        EqpStatus::InvalidArgument => b"invalid argument\0",
        EqpStatus::NumericalFailure => b"numerical failure\0",
    };
    text.as_ptr() as *const std::os::raw::c_char
}

/// Closed-form ball equilibrium: constant potential `a`, interior charge
/// `q_interior`, surface charge `q_hat`, for a ball of radius `r` with
/// total charge `q` and screening constant `k`.
///
/// # Safety
/// `a`, `q_interior`, and `q_hat` must each be null or valid for writing
/// one `double`.
#[no_mangle]
pub unsafe extern "C" fn eqp_ball_closed_form(
    r: f64,
    q: f64,
    k: f64,
    a: *mut f64,
    q_interior: *mut f64,
    q_hat: *mut f64,
) -> EqpStatus {
    if a.is_null() || q_interior.is_null() || q_hat.is_null() {
        return EqpStatus::NullPointer;
    }
    if !(r > 0.0) || !k.is_finite() || k < 0.0 {
        return EqpStatus::InvalidArgument;
    }
    match ball_closed_form(r, q, k) {
        Ok((va, vq, vh)) => {
            a.write(va);
            q_interior.write(vq);
            q_hat.write(vh);
            EqpStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Numerical capacity of a ball on a uniform radial grid.
///
/// # Safety
/// `out` must be null or valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn eqp_capacity_ball(
    radius: f64,
    r_max: f64,
    nodes: usize,
    out: *mut f64,
) -> EqpStatus {
    if out.is_null() {
        return EqpStatus::NullPointer;
    }
    if !(radius > 0.0) || !(r_max > radius) || nodes < 8 {
        return EqpStatus::InvalidArgument;
    }
    let out_addr = out as usize;
    guarded(move || {
        let geometry = ConductorGeometry::Ball { radius };
        let result = RadialGrid::uniform(r_max, nodes, &geometry)
            .and_then(|grid| capacity(&geometry, &grid));
        match result {
            Ok(c) => {
                // SAFETY: checked non-null above; caller guarantees validity.
                unsafe { (out_addr as *mut f64).write(c) };
                EqpStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Poincare-type constant of a ball (radial discretization, default grid).
///
/// # Safety
/// `out` must be null or valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn eqp_poincare_constant_ball(radius: f64, out: *mut f64) -> EqpStatus {
    if out.is_null() {
        return EqpStatus::NullPointer;
    }
    if !(radius > 0.0) {
        return EqpStatus::InvalidArgument;
    }
    let out_addr = out as usize;
    guarded(move || {
        let geometry = ConductorGeometry::Ball { radius };
        let result = RadialGrid::uniform(12.0 * radius, 2401, &geometry)
            .and_then(|grid| poincare_constant(&geometry, &grid));
        match result {
            Ok(k) => {
                unsafe { (out_addr as *mut f64).write(k) };
                EqpStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Electron-pair stability parameter t.
///
/// # Safety
/// `out` and `in_range` must each be null or valid for writing.
#[no_mangle]
pub unsafe extern "C" fn eqp_pair_parameter_t(
    r: f64,
    delta: f64,
    k: f64,
    out: *mut f64,
    in_range: *mut bool,
) -> EqpStatus {
    if out.is_null() || in_range.is_null() {
        return EqpStatus::NullPointer;
    }
    if !(r > 0.0) || !(delta > 0.0) || !(k >= 0.0) {
        return EqpStatus::InvalidArgument;
    }
    match pair_parameter_t(r, delta, k) {
        Ok(t) => {
            out.write(t);
            in_range.write((0.0..=1.0).contains(&t));
            EqpStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Minimal photon energy for ejecting the electron pair across the gap.
///
/// # Safety
/// `out` must be null or valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn eqp_threshold_energy(
    r: f64,
    delta: f64,
    q: f64,
    e: f64,
    out: *mut f64,
) -> EqpStatus {
    if out.is_null() {
        return EqpStatus::NullPointer;
    }
    if !(r > 0.0) || !(delta > 0.0) {
        return EqpStatus::InvalidArgument;
    }
    out.write(threshold_energy(r, delta, q, e));
    EqpStatus::Ok
}

/// Solves the ball equilibrium numerically and returns an owned handle.
///
/// # Safety
/// `out` must be null or valid for writing one pointer. On `EQP_OK` the
/// caller owns the handle and must release it with
/// [`eqp_equilibrium_free`].
#[no_mangle]
pub unsafe extern "C" fn eqp_equilibrium_solve_ball(
    radius: f64,
    q: f64,
    k: f64,
    r_max: f64,
    nodes: usize,
    out: *mut *mut EqpEquilibrium,
) -> EqpStatus {
    if out.is_null() {
        return EqpStatus::NullPointer;
    }
    if !(radius > 0.0) || !(r_max > radius) || nodes < 8 || !(k >= 0.0) {
        return EqpStatus::InvalidArgument;
    }
    let out_addr = out as usize;
    guarded(move || {
        let geometry = ConductorGeometry::Ball { radius };
        let result = RadialGrid::uniform(r_max, nodes, &geometry)
            .and_then(|grid| solve_equilibrium(&geometry, q, k, &grid));
        match result {
            Ok(solution) => {
                let handle = Box::into_raw(Box::new(EqpEquilibrium { solution }));
                unsafe { (out_addr as *mut *mut EqpEquilibrium).write(handle) };
                EqpStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Constant conductor potential A of a solved equilibrium.
///
/// # Safety
/// `handle` must be null or a live pointer from
/// [`eqp_equilibrium_solve_ball`]. Null returns NaN.
#[no_mangle]
pub unsafe extern "C" fn eqp_equilibrium_a(handle: *const EqpEquilibrium) -> f64 {
    match handle.as_ref() {
        Some(h) => h.solution.a,
        None => f64::NAN,
    }
}

/// Interior (volume) charge total Q.
///
/// # Safety
/// As for [`eqp_equilibrium_a`].
#[no_mangle]
pub unsafe extern "C" fn eqp_equilibrium_interior_charge(
    handle: *const EqpEquilibrium,
) -> f64 {
    match handle.as_ref() {
        Some(h) => h.solution.q_interior,
        None => f64::NAN,
    }
}

/// Surface charge total q_hat.
///
/// # Safety
/// As for [`eqp_equilibrium_a`].
#[no_mangle]
pub unsafe extern "C" fn eqp_equilibrium_surface_charge(
    handle: *const EqpEquilibrium,
) -> f64 {
    match handle.as_ref() {
        Some(h) => h.solution.q_surface,
        None => f64::NAN,
    }
}

/// Equilibrium energy W = qA.
///
/// # Safety
/// As for [`eqp_equilibrium_a`].
#[no_mangle]
pub unsafe extern "C" fn eqp_equilibrium_energy(handle: *const EqpEquilibrium) -> f64 {
    match handle.as_ref() {
        Some(h) => h.solution.energy,
        None => f64::NAN,
    }
}

/// Potential U(rho) of the solved equilibrium (exact 1/rho tail beyond
/// the grid).
///
/// # Safety
/// `handle` as for [`eqp_equilibrium_a`]; `out` must be null or valid
/// for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn eqp_equilibrium_potential_at(
    handle: *const EqpEquilibrium,
    rho: f64,
    out: *mut f64,
) -> EqpStatus {
    let Some(h) = handle.as_ref() else {
        return EqpStatus::NullPointer;
    };
    if out.is_null() {
        return EqpStatus::NullPointer;
    }
    if !(rho >= 0.0) {
        return EqpStatus::InvalidArgument;
    }
    out.write(h.solution.potential.eval(rho));
    EqpStatus::Ok
}

/// Releases a handle from [`eqp_equilibrium_solve_ball`]; null is a no-op.
///
/// # Safety
/// `handle` must be null or a live pointer from
/// [`eqp_equilibrium_solve_ball`], not freed before, and unused after.
#[no_mangle]
pub unsafe extern "C" fn eqp_equilibrium_free(handle: *mut EqpEquilibrium) {
    if handle.is_null() {
        return;
    }
    drop(Box::from_raw(handle));
}
