//! C ABI over `normconst`.
//!
//! Objects are opaque handles created by `nc_*_new` functions and released
//! with the matching `nc_*_free`. Every fallible call returns an
//! [`NcStatus`] and writes results through out-pointers; on failure the
//! message is kept per thread and read with [`nc_last_error_message`].

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use normconst::bounds::{self, Regime};
use normconst::discrepancy;
use normconst::integrate::{self, TSpec, TruncationPolicy};
use normconst::marginal::{self, GaussianLmm, LmmSpec, MarginalConfig, Method};
use normconst::model::{GaussianConjugate, PosteriorModel};
use normconst::sequences::{self, PointSet};
use normconst::Error;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NcStatus {
    Ok = 0,
    InvalidArgument = 1,
    DimensionMismatch = 2,
    BudgetExceeded = 3,
    Numerical = 4,
    Io = 5,
    NullPointer = 6,
    Panic = 7,
}

/// Truncation policy selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NcPolicy {
    FixedP = 0,
    HighDim = 1,
}

/// `t(n)` selector; `Fixed` reads the accompanying value.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NcTKind {
    Theorem = 0,
    SqrtLog = 1,
    Log = 2,
    Fixed = 3,
}

/// Regime selector for rate and crossover functions.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NcRegime {
    FixedP = 0,
    HighDim = 1,
    GaussianSpecial = 2,
    Classical = 3,
}

/// An immutable point set in `[0,1)^p`.
pub struct NcPointSet(PointSet);

/// A conjugate Gaussian posterior with its closed-form normalizer.
pub struct NcGaussianModel(GaussianConjugate);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> NcStatus {
    match e {
        Error::InvalidArgument(_) => NcStatus::InvalidArgument,
        Error::DimensionMismatch { .. } => NcStatus::DimensionMismatch,
        Error::BudgetExceeded { .. } => NcStatus::BudgetExceeded,
        Error::Numerical(_) => NcStatus::Numerical,
        Error::Io(_) => NcStatus::Io,
    }
}

/// Runs `f`, mapping errors and panics to status codes.
fn guard<F: FnOnce() -> Result<(), NcError>>(f: F) -> NcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            NcStatus::Ok
        }
        Ok(Err(NcError::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(NcError::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            NcStatus::NullPointer
        }
        Err(_) => {
            set_error("internal panic".to_string());
            NcStatus::Panic
        }
    }
}

enum NcError {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for NcError {
    fn from(e: Error) -> Self {
        NcError::Lib(e)
    }
}

fn nonnull<T>(p: *const T, what: &'static str) -> Result<(), NcError> {
    if p.is_null() {
        Err(NcError::Null(what))
    } else {
        Ok(())
    }
}

fn t_spec(kind: NcTKind, value: f64) -> TSpec {
    match kind {
        NcTKind::Theorem => TSpec::Theorem,
        NcTKind::SqrtLog => TSpec::SqrtLog,
        NcTKind::Log => TSpec::Log,
        NcTKind::Fixed => TSpec::Fixed(value),
    }
}

fn policy(p: NcPolicy) -> TruncationPolicy {
    match p {
        NcPolicy::FixedP => TruncationPolicy::FixedP,
        NcPolicy::HighDim => TruncationPolicy::HighDim,
    }
}

fn regime(r: NcRegime) -> Regime {
    match r {
        NcRegime::FixedP => Regime::FixedP,
        NcRegime::HighDim => Regime::HighDim,
        NcRegime::GaussianSpecial => Regime::GaussianSpecial,
        NcRegime::Classical => Regime::Classical,
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length excluding the NUL.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn nc_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// First `m` Halton points in dimension `p` starting at `start_index`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn nc_halton_new(m: usize, p: usize, start_index: u64, out: *mut *mut NcPointSet) -> NcStatus {
    guard(|| {
        nonnull(out, "out")?;
        let ps = sequences::halton(m, p, start_index)?;
        *out = Box::into_raw(Box::new(NcPointSet(ps)));
        Ok(())
    })
}

/// `m` seeded uniform points in dimension `p`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn nc_uniform_new(m: usize, p: usize, seed: u64, out: *mut *mut NcPointSet) -> NcStatus {
    guard(|| {
        nonnull(out, "out")?;
        let ps = sequences::uniform_grid(m, p, seed)?;
        *out = Box::into_raw(Box::new(NcPointSet(ps)));
        Ok(())
    })
}

/// Point set from `m * p` row-major coordinates in `[0,1)`.
///
/// # Safety
/// `coords` must point to `m * p` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nc_point_set_from_coords(
    coords: *const f64,
    m: usize,
    p: usize,
    out: *mut *mut NcPointSet,
) -> NcStatus {
    guard(|| {
        nonnull(coords, "coords")?;
        nonnull(out, "out")?;
        let len = m.checked_mul(p).ok_or(Error::InvalidArgument("m * p overflows".into()))?;
        let flat = std::slice::from_raw_parts(coords, len);
        let rows: Vec<Vec<f64>> = if p == 0 { Vec::new() } else { flat.chunks_exact(p).map(<[f64]>::to_vec).collect() };
        let ps = PointSet::from_rows(&rows)?;
        *out = Box::into_raw(Box::new(NcPointSet(ps)));
        Ok(())
    })
}

/// # Safety
/// `ps` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nc_point_set_free(ps: *mut NcPointSet) {
    if !ps.is_null() {
        drop(Box::from_raw(ps));
    }
}

/// Number of points, or 0 for a null handle.
///
/// # Safety
/// `ps` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nc_point_set_m(ps: *const NcPointSet) -> usize {
    ps.as_ref().map_or(0, |p| p.0.m())
}

/// Dimension, or 0 for a null handle.
///
/// # Safety
/// `ps` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nc_point_set_p(ps: *const NcPointSet) -> usize {
    ps.as_ref().map_or(0, |p| p.0.p())
}

/// Copies the row-major coordinates into `buf`, which must hold `m * p` doubles.
///
/// # Safety
/// `ps` must be a live handle and `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn nc_point_set_copy(ps: *const NcPointSet, buf: *mut f64, len: usize) -> NcStatus {
    guard(|| {
        nonnull(ps, "ps")?;
        nonnull(buf, "buf")?;
        let src = (*ps).0.as_slice();
        if len < src.len() {
            return Err(Error::DimensionMismatch { expected: src.len(), actual: len }.into());
        }
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
        Ok(())
    })
}

/// Exact star discrepancy; brute force refuses work above `budget`
/// (`budget <= 0` selects the default).
///
/// # Safety
/// `ps` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nc_star_discrepancy(ps: *const NcPointSet, budget: f64, out: *mut f64) -> NcStatus {
    guard(|| {
        nonnull(ps, "ps")?;
        nonnull(out, "out")?;
        let ps = &(*ps).0;
        let report = if ps.p() == 1 {
            discrepancy::star_discrepancy_1d(ps)?
        } else {
            let b = if budget > 0.0 { budget } else { discrepancy::DEFAULT_WORK_BUDGET };
            discrepancy::star_discrepancy_exact_with_budget(ps, b)?
        };
        *out = report.value;
        Ok(())
    })
}

/// Explicit upper bound on the star discrepancy of `m` Halton points.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nc_halton_bound(m: usize, p: usize, out: *mut f64) -> NcStatus {
    guard(|| {
        nonnull(out, "out")?;
        *out = discrepancy::halton_bound_explicit(m, p)?.value;
        Ok(())
    })
}

/// Simulates `n` observations from `N(0, I_p)` and builds the posterior.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nc_gaussian_simulate(
    n: usize,
    p: usize,
    sigma: f64,
    sigma_p: f64,
    seed: u64,
    out: *mut *mut NcGaussianModel,
) -> NcStatus {
    guard(|| {
        nonnull(out, "out")?;
        let model = GaussianConjugate::simulate(n, p, sigma, sigma_p, seed)?;
        *out = Box::into_raw(Box::new(NcGaussianModel(model)));
        Ok(())
    })
}

/// Builds the posterior from `n * p` row-major observations.
///
/// # Safety
/// `data` must point to `n * p` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nc_gaussian_from_data(
    data: *const f64,
    n: usize,
    p: usize,
    sigma: f64,
    sigma_p: f64,
    out: *mut *mut NcGaussianModel,
) -> NcStatus {
    guard(|| {
        nonnull(data, "data")?;
        nonnull(out, "out")?;
        let len = n.checked_mul(p).ok_or(Error::InvalidArgument("n * p overflows".into()))?;
        let model = GaussianConjugate::from_flat(std::slice::from_raw_parts(data, len), n, p, sigma, sigma_p)?;
        *out = Box::into_raw(Box::new(NcGaussianModel(model)));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nc_gaussian_free(model: *mut NcGaussianModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Exact mode-relative log normalizer.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nc_gaussian_oracle_log(model: *const NcGaussianModel, out: *mut f64) -> NcStatus {
    guard(|| {
        nonnull(model, "model")?;
        nonnull(out, "out")?;
        *out = (*model).0.oracle_log_normalizer().expect("gaussian oracle");
        Ok(())
    })
}

/// Truncated estimate of the mode-relative log normalizer on the cube
/// around the mode. `use_likelihood_curvature` selects `η = 1/σ²` for the
/// radius instead of the posterior curvature. `out_rel_error` may be null.
///
/// # Safety
/// Handles must be live; `out_log` writable; `out_rel_error` null or writable.
#[no_mangle]
pub unsafe extern "C" fn nc_gaussian_estimate(
    model: *const NcGaussianModel,
    points: *const NcPointSet,
    policy_kind: NcPolicy,
    t_kind: NcTKind,
    t_value: f64,
    use_likelihood_curvature: bool,
    out_log: *mut f64,
    out_rel_error: *mut f64,
) -> NcStatus {
    guard(|| {
        nonnull(model, "model")?;
        nonnull(points, "points")?;
        nonnull(out_log, "out_log")?;
        let model = &(*model).0;
        let meta = if use_likelihood_curvature { model.likelihood_meta() } else { model.meta() };
        let region = integrate::mode_region_with_meta(model, &meta, policy(policy_kind), t_spec(t_kind, t_value))?;
        let report = integrate::estimate_normalizer(model, &region, &(*points).0)?;
        *out_log = report.log_estimate;
        if !out_rel_error.is_null() {
            *out_rel_error = report.rel_error.unwrap_or(f64::NAN);
        }
        Ok(())
    })
}

/// Bell number `B_k` for `k <= 25`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nc_bell_number(k: usize, out: *mut u64) -> NcStatus {
    guard(|| {
        nonnull(out, "out")?;
        *out = bounds::bell_number(k)?;
        Ok(())
    })
}

/// QMC/MC rate ratio; `out_qmc_wins` is set when the ratio is below one.
///
/// # Safety
/// Out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn nc_crossover(
    n: usize,
    m: usize,
    p: usize,
    regime_kind: NcRegime,
    c_const: f64,
    out_ratio: *mut f64,
    out_qmc_wins: *mut bool,
) -> NcStatus {
    guard(|| {
        nonnull(out_ratio, "out_ratio")?;
        nonnull(out_qmc_wins, "out_qmc_wins")?;
        let c = bounds::crossover(n, m, p, regime(regime_kind), c_const)?;
        *out_ratio = c.ratio;
        *out_qmc_wins = c.qmc_wins;
        Ok(())
    })
}

/// Approximate and exact log marginal likelihoods of a simulated Gaussian
/// random-intercept model at `theta` (QMC with `m` points per group).
///
/// # Safety
/// Out-pointers must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn nc_lmm_log_marginal(
    k: usize,
    ni: usize,
    sigma: f64,
    tau: f64,
    theta0: f64,
    seed: u64,
    theta: f64,
    m: usize,
    out_approx: *mut f64,
    out_exact: *mut f64,
) -> NcStatus {
    guard(|| {
        nonnull(out_approx, "out_approx")?;
        nonnull(out_exact, "out_exact")?;
        let lmm = GaussianLmm::simulate(&LmmSpec { k, ni, sigma, tau, theta0, seed })?;
        let cfg = MarginalConfig { method: Method::Qmc, m, ..Default::default() };
        *out_approx = marginal::marginal_loglik(&lmm, &[theta], &cfg)?.log_marginal;
        *out_exact = lmm.oracle_log_marginal(theta)?;
        Ok(())
    })
}
