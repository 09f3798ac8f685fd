//! C ABI for the conic-lmcf toolkit.
//!
//! Conventions:
//!
//! * Every fallible function returns a [`ClmStatus`]; results come back
//!   through out-pointers, which are written only on success.
//! * Objects are opaque handles created by `clm_*_new`-style functions and
//!   released with the matching `clm_*_free`. Freeing NULL is a no-op.
//! * After a failure, `clm_last_error_message` copies a description of the
//!   most recent error on the calling thread.
//! * Panics never cross the boundary; they surface as `CLM_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use conic_lmcf::cone_heat::{
    fredholm_index, solve_mode, CauchyProblem, Forcing, InnerBoundary, LaplaceTypeSpec, ModeSolution, RadialGrid,
};
use conic_lmcf::link_spectrum::{self, ExponentTable, LinkSpec, Spectrum};
use conic_lmcf::lmcf_flow::{self, FlowState, InitialCondition, TorusGrid};
use conic_lmcf::sl_cones::{self, SLCone};
use conic_lmcf::weighted_norms::WeightVector;
use conic_lmcf::Error;

/// Result codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    ExceptionalWeight = 3,
    WindowTooSmall = 4,
    GraphCondition = 5,
    Numerical = 6,
    Parse = 7,
    Io = 8,
    OutOfRange = 9,
    Panic = 10,
}

impl From<&Error> for ClmStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidInput(_) | Error::WeightOutOfRange { .. } | Error::MissingDerivative(_) => {
                ClmStatus::InvalidInput
            }
            Error::ExceptionalWeight { .. } => ClmStatus::ExceptionalWeight,
            Error::WindowTooSmall { .. } => ClmStatus::WindowTooSmall,
            Error::GraphCondition { .. } | Error::StepRejected { .. } => ClmStatus::GraphCondition,
            Error::Parse(_) => ClmStatus::Parse,
            Error::Io(_) => ClmStatus::Io,
            _ => ClmStatus::Numerical,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (ClmStatus, String)>) -> ClmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            ClmStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            ClmStatus::Panic
        }
    }
}

type FfiResult<T> = Result<T, (ClmStatus, String)>;

fn lib<T>(r: conic_lmcf::Result<T>) -> FfiResult<T> {
    r.map_err(|e| (ClmStatus::from(&e), e.to_string()))
}

fn null(what: &str) -> (ClmStatus, String) {
    (ClmStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn borrow_mut<'a, T>(p: *mut T, what: &str) -> FfiResult<&'a mut T> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> FfiResult<()> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn string<'a>(s: *const c_char, what: &str) -> FfiResult<&'a str> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| (ClmStatus::InvalidInput, format!("{what} is not valid UTF-8")))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> FfiResult<&'a [f64]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Copies `src` into a caller buffer of capacity `cap`; fails when short.
unsafe fn copy_out(src: &[f64], buf: *mut f64, cap: usize) -> FfiResult<()> {
    if cap < src.len() {
        return Err((ClmStatus::OutOfRange, format!("buffer holds {cap} values, {} needed", src.len())));
    }
    if src.is_empty() {
        return Ok(());
    }
    if buf.is_null() {
        return Err(null("buffer"));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn clm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Length in bytes (without NUL) of the calling thread's last error message.
#[no_mangle]
pub extern "C" fn clm_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().len())
}

/// Copies the last error message, NUL-terminated and truncated to fit
/// `cap` bytes. Returns the full message length (without NUL).
///
/// # Safety
/// `buf` must be NULL or point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn clm_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

// ---------------------------------------------------------------------------
// Link spectra and exponent tables

/// Eigenvalues of −Δ on a link, with multiplicities.
pub struct ClmSpectrum {
    inner: Spectrum,
}

/// Exponent set of a cone over a link, with counting functions.
pub struct ClmExponentTable {
    inner: ExponentTable,
}

/// Spectrum of the unit round sphere S^dim up to `lambda_max`.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn clm_spectrum_sphere(dim: usize, lambda_max: f64, out: *mut *mut ClmSpectrum) -> ClmStatus {
    guard(|| {
        let link = LinkSpec::round_sphere(dim);
        lib(link.validate())?;
        let inner = lib(link_spectrum::eigenvalues(&link, lambda_max))?;
        write(out, boxed(ClmSpectrum { inner }), "out")
    })
}

/// Spectrum of the flat torus with constant metric `metric` (row-major
/// dim × dim) up to `lambda_max`.
///
/// # Safety
/// `metric` must point to dim·dim doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn clm_spectrum_torus(
    dim: usize,
    metric: *const f64,
    lambda_max: f64,
    out: *mut *mut ClmSpectrum,
) -> ClmStatus {
    guard(|| {
        let flat = slice(metric, dim * dim, "metric")?;
        if dim == 0 {
            return Err((ClmStatus::InvalidInput, "torus dimension must be >= 1".into()));
        }
        let link = LinkSpec::flat_torus(flat.chunks(dim).map(|r| r.to_vec()).collect());
        lib(link.validate())?;
        let inner = lib(link_spectrum::eigenvalues(&link, lambda_max))?;
        write(out, boxed(ClmSpectrum { inner }), "out")
    })
}

/// Number of distinct eigenvalues.
///
/// # Safety
/// `spectrum` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn clm_spectrum_len(spectrum: *const ClmSpectrum, out: *mut usize) -> ClmStatus {
    guard(|| write(out, borrow(spectrum, "spectrum")?.inner.len(), "out"))
}

/// The `index`-th distinct eigenvalue and its multiplicity.
///
/// # Safety
/// `spectrum` must be a live handle; out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn clm_spectrum_get(
    spectrum: *const ClmSpectrum,
    index: usize,
    lambda: *mut f64,
    multiplicity: *mut usize,
) -> ClmStatus {
    guard(|| {
        let s = &borrow(spectrum, "spectrum")?.inner;
        let e = s.entries.get(index).ok_or_else(|| (ClmStatus::OutOfRange, format!("index {index} >= {}", s.len())))?;
        if lambda.is_null() || multiplicity.is_null() {
            return Err(null("output"));
        }
        write(lambda, e.lambda, "lambda")?;
        write(multiplicity, e.multiplicity, "multiplicity")
    })
}

/// # Safety
/// `spectrum` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn clm_spectrum_free(spectrum: *mut ClmSpectrum) {
    free(spectrum)
}

/// Exponent table of the cone of dimension `m` over the spectrum's link,
/// restricted to [lo, hi].
///
/// # Safety
/// `spectrum` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn clm_exponents_new(
    spectrum: *const ClmSpectrum,
    m: usize,
    lo: f64,
    hi: f64,
    out: *mut *mut ClmExponentTable,
) -> ClmStatus {
    guard(|| {
        let s = &borrow(spectrum, "spectrum")?.inner;
        let inner = lib(link_spectrum::exponents(s, m, (lo, hi)))?;
        write(out, boxed(ClmExponentTable { inner }), "out")
    })
}

/// Number of distinct exponents in the table.
///
/// # Safety
/// `table` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn clm_exponents_len(table: *const ClmExponentTable, out: *mut usize) -> ClmStatus {
    guard(|| write(out, borrow(table, "table")?.inner.entries.len(), "out"))
}

/// The `index`-th exponent (ascending) and its multiplicity.
///
/// # Safety
/// `table` must be a live handle; out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn clm_exponents_get(
    table: *const ClmExponentTable,
    index: usize,
    alpha: *mut f64,
    multiplicity: *mut usize,
) -> ClmStatus {
    guard(|| {
        let t = &borrow(table, "table")?.inner;
        let e = t
            .entries
            .get(index)
            .ok_or_else(|| (ClmStatus::OutOfRange, format!("index {index} >= {}", t.entries.len())))?;
        if alpha.is_null() || multiplicity.is_null() {
            return Err(null("output"));
        }
        write(alpha, e.alpha, "alpha")?;
        write(multiplicity, e.multiplicity, "multiplicity")
    })
}

/// Counting function M(δ).
///
/// # Safety
/// `table` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn clm_exponents_count_m(table: *const ClmExponentTable, delta: f64, out: *mut i64) -> ClmStatus {
    guard(|| {
        let v = lib(borrow(table, "table")?.inner.count_m(delta))?;
        write(out, v, "out")
    })
}

/// Counting function N(δ).
///
/// # Safety
/// `table` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn clm_exponents_count_n(table: *const ClmExponentTable, delta: f64, out: *mut i64) -> ClmStatus {
    guard(|| {
        let v = lib(borrow(table, "table")?.inner.count_n(delta))?;
        write(out, v, "out")
    })
}

/// # Safety
/// `table` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn clm_exponents_free(table: *mut ClmExponentTable) {
    free(table)
}

// ---------------------------------------------------------------------------
// Special Lagrangian cones

/// A special Lagrangian cone from the built-in catalog.
pub struct ClmCone {
    inner: SLCone,
}

/// Looks up a catalog cone by name ("hl-torus-3", "plane-3").
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn clm_cone_from_catalog(name: *const c_char, out: *mut *mut ClmCone) -> ClmStatus {
    guard(|| {
        let inner = lib(SLCone::from_catalog(string(name, "name")?))?;
        write(out, boxed(ClmCone { inner }), "out")
    })
}

/// Stability index and the two moment-map ranks (translations, su(m)).
///
/// # Safety
/// `cone` must be a live handle; out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn clm_cone_stability(
    cone: *const ClmCone,
    index: *mut i64,
    rank_translations: *mut usize,
    rank_su: *mut usize,
) -> ClmStatus {
    guard(|| {
        let c = &borrow(cone, "cone")?.inner;
        if index.is_null() || rank_translations.is_null() || rank_su.is_null() {
            return Err(null("output"));
        }
        let table = lib(sl_cones::cone_table(c, -(c.m as f64), 3.0))?;
        let rep = lib(sl_cones::stability_index(c, &table))?;
        write(index, rep.index, "index")?;
        write(rank_translations, rep.rank_translations, "rank_translations")?;
        write(rank_su, rep.rank_su, "rank_su")
    })
}

/// Fredholm index −M(γ) of the Laplacian on the cone with weight γ.
/// Fails with `CLM_STATUS_EXCEPTIONAL_WEIGHT` when γ is an exponent.
///
/// # Safety
/// `cone` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn clm_cone_fredholm_index(cone: *const ClmCone, gamma: f64, out: *mut i64) -> ClmStatus {
    guard(|| {
        let c = &borrow(cone, "cone")?.inner;
        let table = lib(sl_cones::cone_table(c, gamma.min(0.0) - 1.0, gamma.max(0.0) + 1.0))?;
        let w = lib(WeightVector::new(vec![gamma]))?;
        let v = lib(fredholm_index(&[table], &w))?;
        write(out, v, "out")
    })
}

/// # Safety
/// `cone` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn clm_cone_free(cone: *mut ClmCone) {
    free(cone)
}

// ---------------------------------------------------------------------------
// Heat equation on a model cone

/// A solved radial mode u(t, r).
pub struct ClmHeatSolution {
    inner: ModeSolution,
}

/// Solves ∂ₜu = Δu + coef·r^power for the mode of link eigenvalue
/// `lambda` on the cone of dimension `m`, with zero initial and outer
/// boundary data, on a graded grid of `cells` cells over [0, radius].
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn clm_heat_solve_power(
    m: usize,
    lambda: f64,
    radius: f64,
    cells: usize,
    grading: f64,
    t_end: f64,
    dt: f64,
    coef: f64,
    power: f64,
    out: *mut *mut ClmHeatSolution,
) -> ClmStatus {
    guard(|| {
        let problem = CauchyProblem {
            spec: LaplaceTypeSpec::laplacian(m, lambda),
            grid: lib(RadialGrid::new(radius, cells, grading))?,
            t_end,
            dt,
            forcing: Forcing::Power { coef, power },
            outer: Forcing::Zero,
            inner: InnerBoundary::Extrapolate,
        };
        let inner = lib(solve_mode(&problem))?;
        write(out, boxed(ClmHeatSolution { inner }), "out")
    })
}

/// Number of radial nodes.
///
/// # Safety
/// `sol` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn clm_heat_len(sol: *const ClmHeatSolution, out: *mut usize) -> ClmStatus {
    guard(|| write(out, borrow(sol, "solution")?.inner.nodes.len(), "out"))
}

/// Copies the radial nodes into `buf` (capacity `cap`).
///
/// # Safety
/// `sol` must be a live handle; `buf` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn clm_heat_nodes(sol: *const ClmHeatSolution, buf: *mut f64, cap: usize) -> ClmStatus {
    guard(|| copy_out(&borrow(sol, "solution")?.inner.nodes, buf, cap))
}

/// Copies the solution at the final time into `buf` (capacity `cap`).
///
/// # Safety
/// `sol` must be a live handle; `buf` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn clm_heat_final(sol: *const ClmHeatSolution, buf: *mut f64, cap: usize) -> ClmStatus {
    guard(|| copy_out(borrow(sol, "solution")?.inner.last(), buf, cap))
}

/// # Safety
/// `sol` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn clm_heat_free(sol: *mut ClmHeatSolution) {
    free(sol)
}

// ---------------------------------------------------------------------------
// Lagrangian mean curvature flow on the flat torus

/// Current state of a flow on T^m.
pub struct ClmFlow {
    state: FlowState,
}

/// Starts a flow on an n^m periodic grid from `amplitude · expr(x1, x2, x3)`.
///
/// # Safety
/// `expr` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn clm_flow_new(
    m: usize,
    n: usize,
    expr: *const c_char,
    amplitude: f64,
    out: *mut *mut ClmFlow,
) -> ClmStatus {
    guard(|| {
        let grid = lib(TorusGrid::new(m, n))?;
        let ic = InitialCondition { expr: string(expr, "expr")?.to_string(), amplitude };
        let state = lib(FlowState::new(grid, lib(ic.sample(&grid))?))?;
        write(out, boxed(ClmFlow { state }), "out")
    })
}

/// Advances the flow to time `t_end` with step `dt` (0 selects 0.25·dx²).
/// The handle is left unchanged on failure.
///
/// # Safety
/// `flow` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn clm_flow_evolve(flow: *mut ClmFlow, t_end: f64, dt: f64) -> ClmStatus {
    guard(|| {
        let f = borrow_mut(flow, "flow")?;
        let dt = if dt == 0.0 { f.state.grid.default_dt() } else { dt };
        let run = lib(lmcf_flow::evolve(&f.state, t_end, dt, &[]))?;
        f.state = run.state;
        Ok(())
    })
}

/// Number of grid nodes n^m.
///
/// # Safety
/// `flow` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn clm_flow_len(flow: *const ClmFlow, out: *mut usize) -> ClmStatus {
    guard(|| write(out, borrow(flow, "flow")?.state.u.len(), "out"))
}

/// Current time.
///
/// # Safety
/// `flow` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn clm_flow_time(flow: *const ClmFlow, out: *mut f64) -> ClmStatus {
    guard(|| write(out, borrow(flow, "flow")?.state.t, "out"))
}

/// sup |θ| of the current state.
///
/// # Safety
/// `flow` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn clm_flow_sup_theta(flow: *const ClmFlow, out: *mut f64) -> ClmStatus {
    guard(|| write(out, borrow(flow, "flow")?.state.sup_theta(), "out"))
}

/// Copies the potential u (axis 0 fastest) into `buf` (capacity `cap`).
///
/// # Safety
/// `flow` must be a live handle; `buf` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn clm_flow_field(flow: *const ClmFlow, buf: *mut f64, cap: usize) -> ClmStatus {
    guard(|| copy_out(&borrow(flow, "flow")?.state.u, buf, cap))
}

/// Copies the Lagrangian angle θ into `buf` (capacity `cap`).
///
/// # Safety
/// `flow` must be a live handle; `buf` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn clm_flow_theta(flow: *const ClmFlow, buf: *mut f64, cap: usize) -> ClmStatus {
    guard(|| copy_out(&borrow(flow, "flow")?.state.theta, buf, cap))
}

/// # Safety
/// `flow` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn clm_flow_free(flow: *mut ClmFlow) {
    free(flow)
}
