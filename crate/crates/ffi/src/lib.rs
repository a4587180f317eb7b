//! C ABI for beamqubo.
//!
//! Every function returns a [`BqStatus`]; on failure a description is kept per
//! thread and can be read with [`bq_last_error_message`]. Handles are opaque
//! and owned by the caller, who releases them with the matching `_free`.
//! Panics never cross the boundary; they come back as `BQ_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use beamqubo::baseline::{best_fit, input_order};
use beamqubo::geometry::{build_proximity_graph, GeoPoint, SatelliteGeometry, User, UserSet};
use beamqubo::graph::ProximityGraph;
use beamqubo::harness::{solve_instance, BackendConfig, BackendKind};
use beamqubo::presolve::{build_reduced_hamiltonian, presolve_with, PresolveOptions, PresolveState};
use beamqubo::qubo::{build_qubo, qubit_count, BeamSolution, ProblemInstance, QuboMatrix};
use beamqubo::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Capacity = 3,
    Infeasible = 4,
    Runtime = 5,
    Panic = 6,
}

/// Backend selectors for [`bq_solve`].
pub const BQ_BACKEND_EXACT: u32 = 0;
pub const BQ_BACKEND_ANNEALING: u32 = 1;

/// User in no beam.
pub const BQ_NO_BEAM: u32 = u32::MAX;

/// A beam placement problem: proximity graph, beam budget and capacity.
pub struct BqInstance(ProblemInstance);

pub struct BqQubo(QuboMatrix);

/// Presolve result together with the instance it was computed for.
pub struct BqPresolve {
    state: PresolveState,
    instance: ProblemInstance,
    options: PresolveOptions,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: BqStatus, msg: impl AsRef<str>) -> BqStatus {
    set_error(msg.as_ref());
    status
}

fn status_of(e: &Error) -> BqStatus {
    match e {
        Error::Validation(_) | Error::DegenerateGeometry(_) | Error::Format(_) => {
            BqStatus::InvalidArgument
        }
        Error::Capacity { .. } | Error::BudgetExhausted(_) => BqStatus::Capacity,
        Error::Infeasible { .. } | Error::Unbounded => BqStatus::Infeasible,
        _ => BqStatus::Runtime,
    }
}

fn guard(f: impl FnOnce() -> Result<(), BqStatus>) -> BqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            BqStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(BqStatus::Panic, format!("panic: {msg}"))
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, BqStatus>;
}

impl<T> OrStatus<T> for beamqubo::Result<T> {
    fn or_status(self) -> Result<T, BqStatus> {
        self.map_err(|e| fail(status_of(&e), e.to_string()))
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, BqStatus> {
    p.as_ref().ok_or_else(|| fail(BqStatus::NullPointer, format!("{name} is NULL")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], BqStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(BqStatus::NullPointer, format!("{name} is NULL")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn put<T>(out: *mut T, value: T, name: &str) -> Result<(), BqStatus> {
    if out.is_null() {
        return Err(fail(BqStatus::NullPointer, format!("{name} is NULL")));
    }
    out.write(value);
    Ok(())
}

fn beam_of(sol: &BeamSolution) -> Vec<u32> {
    sol.assignment
        .iter()
        .map(|row| row.iter().position(|&x| x).map_or(BQ_NO_BEAM, |b| b as u32))
        .collect()
}

/// Copies each user's beam into `out`, which must hold `users` entries.
unsafe fn write_beams(sol: &BeamSolution, out: *mut u32) {
    if !out.is_null() {
        let beams = beam_of(sol);
        ptr::copy_nonoverlapping(beams.as_ptr(), out, beams.len());
    }
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn bq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Number of QUBO variables `N*B + B + B*W`.
#[no_mangle]
pub extern "C" fn bq_qubit_count(users: usize, beams: usize, capacity: usize) -> usize {
    qubit_count(users, beams, capacity)
}

/// Builds an instance from an explicit edge list. `edges` holds `2 * n_edges`
/// user indices, one pair per edge. `beams == 0` means one beam per user.
///
/// # Safety
/// `edges` must point to `2 * n_edges` readable values (or be NULL when
/// `n_edges == 0`) and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bq_instance_new(
    users: usize,
    edges: *const u32,
    n_edges: usize,
    beams: usize,
    capacity: usize,
    out: *mut *mut BqInstance,
) -> BqStatus {
    guard(|| {
        let len = n_edges
            .checked_mul(2)
            .ok_or_else(|| fail(BqStatus::InvalidArgument, "n_edges is too large"))?;
        let flat = slice(edges, len, "edges")?;
        let pairs: Vec<(usize, usize)> =
            flat.chunks_exact(2).map(|p| (p[0] as usize, p[1] as usize)).collect();
        let g = ProximityGraph::from_edges(users, &pairs).or_status()?;
        let beams = if beams == 0 { users } else { beams };
        let inst = ProblemInstance::new(g, beams, capacity).or_status()?;
        put(out, Box::into_raw(Box::new(BqInstance(inst))), "out")
    })
}

/// Builds an instance from user positions in degrees: two users share an
/// edge when the satellite sees them within `alpha_deg` of each other.
/// Satellite altitude is in km. `beams == 0` means one beam per user.
///
/// # Safety
/// `latitudes` and `longitudes` must each point to `users` readable values
/// and `out` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn bq_instance_from_positions(
    users: usize,
    latitudes: *const f64,
    longitudes: *const f64,
    sat_latitude: f64,
    sat_longitude: f64,
    sat_altitude_km: f64,
    alpha_deg: f64,
    beams: usize,
    capacity: usize,
    out: *mut *mut BqInstance,
) -> BqStatus {
    guard(|| {
        let lat = slice(latitudes, users, "latitudes")?;
        let lon = slice(longitudes, users, "longitudes")?;
        let set = lat
            .iter()
            .zip(lon)
            .enumerate()
            .map(|(k, (&la, &lo))| {
                Ok(User {
                    id: k.to_string(),
                    position: GeoPoint::surface(la, lo)?,
                })
            })
            .collect::<beamqubo::Result<Vec<_>>>()
            .and_then(UserSet::new)
            .or_status()?;
        let sat = GeoPoint::new(sat_latitude, sat_longitude, sat_altitude_km).or_status()?;
        let geom = SatelliteGeometry::from_degrees(sat, alpha_deg).or_status()?;
        let g = build_proximity_graph(&set, &geom).or_status()?;
        let beams = if beams == 0 { users } else { beams };
        let inst = ProblemInstance::new(g, beams, capacity).or_status()?;
        put(out, Box::into_raw(Box::new(BqInstance(inst))), "out")
    })
}

/// # Safety
/// `inst` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bq_instance_free(inst: *mut BqInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// # Safety
/// `inst` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn bq_instance_shape(
    inst: *const BqInstance,
    users: *mut usize,
    edges: *mut usize,
    beams: *mut usize,
    capacity: *mut usize,
) -> BqStatus {
    guard(|| {
        let i = &deref(inst, "inst")?.0;
        put(users, i.users(), "users")?;
        put(edges, i.graph.edge_count(), "edges")?;
        put(beams, i.beams, "beams")?;
        put(capacity, i.capacity, "capacity")
    })
}

/// Full QUBO of the instance. `lambda <= 0` selects the default `B + 1`.
///
/// # Safety
/// `inst` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bq_qubo_build(
    inst: *const BqInstance,
    lambda: f64,
    out: *mut *mut BqQubo,
) -> BqStatus {
    guard(|| {
        let i = &deref(inst, "inst")?.0;
        let lambda = if lambda > 0.0 { lambda } else { i.default_lambda() };
        let (q, _) = build_qubo(i, lambda).or_status()?;
        put(out, Box::into_raw(Box::new(BqQubo(q))), "out")
    })
}

/// # Safety
/// `q` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bq_qubo_free(q: *mut BqQubo) {
    if !q.is_null() {
        drop(Box::from_raw(q));
    }
}

/// Variable count, or 0 for NULL.
///
/// # Safety
/// `q` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bq_qubo_size(q: *const BqQubo) -> usize {
    q.as_ref().map_or(0, |q| q.0.size())
}

/// Constant term, or 0 for NULL.
///
/// # Safety
/// `q` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bq_qubo_offset(q: *const BqQubo) -> f64 {
    q.as_ref().map_or(0.0, |q| q.0.offset)
}

/// Energy of `bits` (one byte per variable, 0 or 1) including the offset.
///
/// # Safety
/// `q` must be a live handle, `bits` must hold `len` bytes and `energy`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn bq_qubo_energy(
    q: *const BqQubo,
    bits: *const u8,
    len: usize,
    energy: *mut f64,
) -> BqStatus {
    guard(|| {
        let q = &deref(q, "q")?.0;
        let raw = slice(bits, len, "bits")?;
        if let Some(k) = raw.iter().position(|&b| b > 1) {
            return Err(fail(BqStatus::InvalidArgument, format!("bits[{k}] is not 0 or 1")));
        }
        let x: Vec<bool> = raw.iter().map(|&b| b == 1).collect();
        let e = q.energy(&x).or_status()?;
        put(energy, e, "energy")
    })
}

/// Text form: a `size offset` header, then `i j value` lines.
/// Release the string with [`bq_string_free`].
///
/// # Safety
/// `q` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bq_qubo_to_text(q: *const BqQubo, out: *mut *mut c_char) -> BqStatus {
    guard(|| {
        let q = &deref(q, "q")?.0;
        let s = CString::new(q.to_text()).map_err(|e| fail(BqStatus::Runtime, e.to_string()))?;
        put(out, s.into_raw(), "out")
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Runs the independent-set and LP presolve.
///
/// # Safety
/// `inst` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bq_presolve(
    inst: *const BqInstance,
    allow_active_beam_join: bool,
    out: *mut *mut BqPresolve,
) -> BqStatus {
    guard(|| {
        let instance = deref(inst, "inst")?.0.clone();
        let options = PresolveOptions {
            allow_active_beam_join,
            ..Default::default()
        };
        let state = presolve_with(&instance, &options).or_status()?;
        let p = BqPresolve {
            state,
            instance,
            options,
        };
        put(out, Box::into_raw(Box::new(p)), "out")
    })
}

/// # Safety
/// `p` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bq_presolve_free(p: *mut BqPresolve) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// `p` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn bq_presolve_summary(
    p: *const BqPresolve,
    lp_lower_bound: *mut f64,
    active_beams: *mut usize,
    unassigned_users: *mut usize,
    free_variables: *mut usize,
) -> BqStatus {
    guard(|| {
        let p = deref(p, "p")?;
        put(lp_lower_bound, p.state.lp_lower_bound, "lp_lower_bound")?;
        put(active_beams, p.state.active_beams, "active_beams")?;
        put(unassigned_users, p.state.unassigned.len(), "unassigned_users")?;
        let free = p.state.free_variables(p.options.allow_active_beam_join).len();
        put(free_variables, free, "free_variables")
    })
}

/// Presolve report as JSON. Release with [`bq_string_free`].
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bq_presolve_report(p: *const BqPresolve, out: *mut *mut c_char) -> BqStatus {
    guard(|| {
        let p = deref(p, "p")?;
        let report = p.state.report(p.options.allow_active_beam_join);
        let text = serde_json::to_string(&report).map_err(|e| fail(BqStatus::Runtime, e.to_string()))?;
        let s = CString::new(text).map_err(|e| fail(BqStatus::Runtime, e.to_string()))?;
        put(out, s.into_raw(), "out")
    })
}

/// Reduced Hamiltonian over the variables presolve left free. Fails with
/// `BQ_STATUS_INVALID_ARGUMENT` when presolve placed every user.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bq_presolve_reduced_qubo(p: *const BqPresolve, out: *mut *mut BqQubo) -> BqStatus {
    guard(|| {
        let p = deref(p, "p")?;
        let rh = build_reduced_hamiltonian(&p.state, &p.instance, &p.options)
            .map_err(|e| match e {
                Error::NothingToAnneal => fail(BqStatus::InvalidArgument, e.to_string()),
                e => fail(status_of(&e), e.to_string()),
            })?;
        put(out, Box::into_raw(Box::new(BqQubo(rh.qubo))), "out")
    })
}

/// Best Fit in input order. `beam_of`, when not NULL, receives each user's
/// beam and must hold one entry per user.
///
/// # Safety
/// `inst` must be a live handle, `objective` writable and `beam_of` NULL or
/// writable for `users` entries.
#[no_mangle]
pub unsafe extern "C" fn bq_best_fit(
    inst: *const BqInstance,
    objective: *mut usize,
    beam_of: *mut u32,
) -> BqStatus {
    guard(|| {
        let i = &deref(inst, "inst")?.0;
        let sol = best_fit(i, &input_order(i.users())).or_status()?;
        put(objective, sol.objective, "objective")?;
        write_beams(&sol, beam_of);
        Ok(())
    })
}

/// Presolve, solve what is left with `backend`, merge. For the annealer,
/// zero `sweeps` or `reads` select the defaults. A merged placement that
/// breaks a constraint is still returned, with `feasible` set to false.
///
/// # Safety
/// `inst` must be a live handle, `objective` and `feasible` writable and
/// `beam_of` NULL or writable for `users` entries.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn bq_solve(
    inst: *const BqInstance,
    backend: u32,
    sweeps: usize,
    reads: usize,
    seed: u64,
    allow_active_beam_join: bool,
    objective: *mut usize,
    feasible: *mut bool,
    beam_of: *mut u32,
) -> BqStatus {
    guard(|| {
        let i = &deref(inst, "inst")?.0;
        let mut cfg = BackendConfig {
            kind: match backend {
                BQ_BACKEND_EXACT => BackendKind::Exact,
                BQ_BACKEND_ANNEALING => BackendKind::Sa,
                other => return Err(fail(BqStatus::InvalidArgument, format!("unknown backend {other}"))),
            },
            ..Default::default()
        };
        if sweeps > 0 {
            cfg.sweeps = sweeps;
        }
        if reads > 0 {
            cfg.reads = reads;
        }
        let options = PresolveOptions {
            allow_active_beam_join,
            ..Default::default()
        };
        let outcome = solve_instance(i, &options, &cfg, seed).or_status()?;
        put(objective, outcome.solution.objective, "objective")?;
        put(feasible, outcome.solution.is_feasible(), "feasible")?;
        write_beams(&outcome.solution, beam_of);
        Ok(())
    })
}
