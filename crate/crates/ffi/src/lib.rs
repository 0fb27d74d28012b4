//! C ABI for `ranlat`.
//!
//! Every fallible function returns a [`RanlatStatus`]; on failure a message is
//! available from [`ranlat_last_error_message`] on the same thread. Objects are
//! opaque handles created by `*_new` functions and released by the matching
//! `*_free`. Array outputs are written into caller buffers whose length is
//! passed alongside; the required lengths are available from accessor
//! functions.
//!
//! # Safety
//!
//! Pointers passed in must be null or valid for the documented access. Handles
//! must come from this library and must not be used after being freed.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ranlat::construct::{self, RRule, SelectionConfig, SelectionOutcome};
use ranlat::integrands::{self, TestFunction, TestKind};
use ranlat::lattice::{LatticeRule, Shift};
use ranlat::rng::{self, Purpose};
use ranlat::space::{KorobovParams, WeightRule};
use ranlat::wce;
use ranlat::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RanlatStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidParameter = 3,
    DimensionMismatch = 4,
    Domain = 5,
    NotPrime = 6,
    Unsupported = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Weighted Korobov space parameters.
pub struct RanlatParams(KorobovParams);

/// Rank-1 lattice rule.
pub struct RanlatRule(LatticeRule);

/// Outcome of a random generating vector selection.
pub struct RanlatSelection(SelectionOutcome);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(RanlatStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::DimensionMismatch { .. } => RanlatStatus::DimensionMismatch,
            Error::Domain(_) => RanlatStatus::Domain,
            Error::NotPrime(_) => RanlatStatus::NotPrime,
            Error::UnsupportedAlpha(_)
            | Error::UnsupportedOrder(_)
            | Error::EnumerationTooLarge(_)
            | Error::Unsupported(_) => RanlatStatus::Unsupported,
            _ => RanlatStatus::InvalidParameter,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn run<F: FnOnce() -> Result<(), Failure>>(f: F) -> RanlatStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            RanlatStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            RanlatStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(RanlatStatus::NullPointer, format!("{what} is null"))
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        Failure(
            RanlatStatus::InvalidUtf8,
            format!("{what} is not valid UTF-8"),
        )
    })
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn copy_out<T: Copy>(src: &[T], out: *mut T, len: usize, what: &str) -> Result<(), Failure> {
    if len < src.len() {
        return Err(Failure(
            RanlatStatus::BufferTooSmall,
            format!("{what} needs {} entries, got {len}", src.len()),
        ));
    }
    if src.is_empty() {
        return Ok(());
    }
    if out.is_null() {
        return Err(null(what));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    Ok(())
}

unsafe fn shift_arg(shift: *const f64, dim: usize) -> Result<Option<Shift>, Failure> {
    if shift.is_null() {
        return Ok(None);
    }
    Ok(Some(Shift::new(
        std::slice::from_raw_parts(shift, dim).to_vec(),
    )?))
}

/// Message for the last failed call on this thread, or an empty string.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn ranlat_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ranlat_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates space parameters. `weights` is `"poly:a"` or `"list:g1,g2,..."`.
///
/// # Safety
/// `weights` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ranlat_params_new(
    alpha: f64,
    weights: *const c_char,
    dim: usize,
    out: *mut *mut RanlatParams,
) -> RanlatStatus {
    run(|| {
        let rule: WeightRule = str_arg(weights, "weights")?.parse()?;
        let params = KorobovParams::new(alpha, rule, dim)?;
        write_out(out, Box::into_raw(Box::new(RanlatParams(params))), "out")
    })
}

/// # Safety
/// `params` must be null or a handle from [`ranlat_params_new`].
#[no_mangle]
pub unsafe extern "C" fn ranlat_params_free(params: *mut RanlatParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Creates a rule with `dim` generating vector entries read from `z`.
///
/// # Safety
/// `z` must point to `dim` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ranlat_rule_new(
    n: u64,
    z: *const u64,
    dim: usize,
    out: *mut *mut RanlatRule,
) -> RanlatStatus {
    run(|| {
        let z = slice_arg(z, dim, "z")?.to_vec();
        let rule = LatticeRule::new(n, z)?;
        write_out(out, Box::into_raw(Box::new(RanlatRule(rule))), "out")
    })
}

/// # Safety
/// `rule` must be null or a handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ranlat_rule_free(rule: *mut RanlatRule) {
    if !rule.is_null() {
        drop(Box::from_raw(rule));
    }
}

/// Number of points, or 0 for a null handle.
///
/// # Safety
/// `rule` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ranlat_rule_n_points(rule: *const RanlatRule) -> u64 {
    rule.as_ref().map_or(0, |r| r.0.n_points())
}

/// Dimension, or 0 for a null handle.
///
/// # Safety
/// `rule` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ranlat_rule_dim(rule: *const RanlatRule) -> usize {
    rule.as_ref().map_or(0, |r| r.0.dim())
}

/// Copies the generating vector into `out` (at least `dim` entries).
///
/// # Safety
/// `out` must be writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn ranlat_rule_gen_vector(
    rule: *const RanlatRule,
    out: *mut u64,
    len: usize,
) -> RanlatStatus {
    run(|| copy_out(as_ref(rule, "rule")?.0.gen_vector(), out, len, "out"))
}

/// Writes the `N * dim` point coordinates row by row. `shift` is null or
/// points to `dim` values in `[0, 1)`.
///
/// # Safety
/// `shift` must be null or readable for `dim` values; `out` must be writable
/// for `len` values.
#[no_mangle]
pub unsafe extern "C" fn ranlat_rule_points(
    rule: *const RanlatRule,
    shift: *const f64,
    out: *mut f64,
    len: usize,
) -> RanlatStatus {
    run(|| {
        let rule = &as_ref(rule, "rule")?.0;
        let d = rule.dim();
        let needed = rule.n_points() as usize * d;
        if len < needed {
            return Err(Failure(
                RanlatStatus::BufferTooSmall,
                format!("points need {needed} entries, got {len}"),
            ));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let shift = shift_arg(shift, d)?;
        let mut pts = match &shift {
            Some(s) => rule.iter_shifted(s)?,
            None => rule.iter_points(),
        };
        let buf = std::slice::from_raw_parts_mut(out, needed);
        for row in buf.chunks_mut(d) {
            pts.next_into(row);
        }
        Ok(())
    })
}

/// Squared worst-case error from the closed form (integer alpha in 1..=4).
///
/// # Safety
/// Handles must be live; `out_squared_error` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ranlat_wce_closed_form(
    rule: *const RanlatRule,
    params: *const RanlatParams,
    out_squared_error: *mut f64,
) -> RanlatStatus {
    run(|| {
        let report = wce::wce_closed_form(&as_ref(rule, "rule")?.0, &as_ref(params, "params")?.0)?;
        write_out(out_squared_error, report.squared_error, "out_squared_error")
    })
}

/// Squared worst-case error from the dual-lattice series with frequencies
/// `|k_j| <= k_max` summed explicitly, and a bound on its truncation error.
///
/// # Safety
/// Handles must be live; outputs must be writable. `out_tail_bound` may be null.
#[no_mangle]
pub unsafe extern "C" fn ranlat_wce_brute_force(
    rule: *const RanlatRule,
    params: *const RanlatParams,
    k_max: u64,
    out_squared_error: *mut f64,
    out_tail_bound: *mut f64,
) -> RanlatStatus {
    run(|| {
        let report = wce::wce_brute_force(
            &as_ref(rule, "rule")?.0,
            &as_ref(params, "params")?.0,
            k_max,
        )?;
        write_out(out_squared_error, report.squared_error, "out_squared_error")?;
        if !out_tail_bound.is_null() {
            out_tail_bound.write(report.tail_bound);
        }
        Ok(())
    })
}

/// Best of `r` random generating vectors for a random prime `N` in
/// `(M/2, M]`, or for `fixed_n` when it is nonzero. `r_rule` is `"ran"`,
/// `"rms"`, `"stable"` or `"fixed:K"`.
///
/// # Safety
/// `r_rule` must be a NUL-terminated string; handles must be live; `out` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn ranlat_select(
    m_max: u64,
    fixed_n: u64,
    eta: f64,
    r_rule: *const c_char,
    seed: u64,
    params: *const RanlatParams,
    out: *mut *mut RanlatSelection,
) -> RanlatStatus {
    run(|| {
        let r_rule: RRule = str_arg(r_rule, "r_rule")?.parse()?;
        let cfg = SelectionConfig {
            m_max,
            eta,
            r_rule,
            seed,
            fixed_n: (fixed_n != 0).then_some(fixed_n),
        };
        let outcome = construct::select(&cfg, &as_ref(params, "params")?.0)?;
        write_out(
            out,
            Box::into_raw(Box::new(RanlatSelection(outcome))),
            "out",
        )
    })
}

/// # Safety
/// `selection` must be null or a handle from [`ranlat_select`].
#[no_mangle]
pub unsafe extern "C" fn ranlat_selection_free(selection: *mut RanlatSelection) {
    if !selection.is_null() {
        drop(Box::from_raw(selection));
    }
}

/// Chosen modulus, or 0 for a null handle.
///
/// # Safety
/// `selection` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ranlat_selection_n(selection: *const RanlatSelection) -> u64 {
    selection.as_ref().map_or(0, |s| s.0.n)
}

/// Number of candidates drawn, or 0 for a null handle.
///
/// # Safety
/// `selection` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ranlat_selection_r(selection: *const RanlatSelection) -> u32 {
    selection.as_ref().map_or(0, |s| s.0.r)
}

/// Index of the chosen candidate, or 0 for a null handle.
///
/// # Safety
/// `selection` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ranlat_selection_argmin_index(selection: *const RanlatSelection) -> usize {
    selection.as_ref().map_or(0, |s| s.0.argmin_index)
}

/// Squared worst-case error of the chosen vector, or NaN for a null handle.
///
/// # Safety
/// `selection` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ranlat_selection_squared_error(selection: *const RanlatSelection) -> f64 {
    selection.as_ref().map_or(f64::NAN, |s| s.0.squared_error())
}

/// Copies the chosen generating vector (dimension entries).
///
/// # Safety
/// `out` must be writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn ranlat_selection_z(
    selection: *const RanlatSelection,
    out: *mut u64,
    len: usize,
) -> RanlatStatus {
    run(|| copy_out(&as_ref(selection, "selection")?.0.z_star, out, len, "out"))
}

/// Copies the `r` candidate squared errors in draw order.
///
/// # Safety
/// `out` must be writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn ranlat_selection_candidate_errors(
    selection: *const RanlatSelection,
    out: *mut f64,
    len: usize,
) -> RanlatStatus {
    run(|| {
        copy_out(
            &as_ref(selection, "selection")?.0.candidate_errors,
            out,
            len,
            "out",
        )
    })
}

/// New rule handle for the chosen vector.
///
/// # Safety
/// `selection` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ranlat_selection_rule(
    selection: *const RanlatSelection,
    out: *mut *mut RanlatRule,
) -> RanlatStatus {
    run(|| {
        let rule = as_ref(selection, "selection")?.0.rule();
        write_out(out, Box::into_raw(Box::new(RanlatRule(rule))), "out")
    })
}

/// Component-by-component construction for prime `n` in the dimension of
/// `params`. With `randomized`, each component is drawn uniformly from the
/// `ceil(tau (n - 1))` best candidates using `seed`; otherwise `tau` and
/// `seed` are ignored.
///
/// # Safety
/// `out_z` must be writable for `len` values; `out_squared_error` may be null.
#[no_mangle]
pub unsafe extern "C" fn ranlat_cbc(
    n: u64,
    params: *const RanlatParams,
    randomized: bool,
    tau: f64,
    seed: u64,
    out_z: *mut u64,
    len: usize,
    out_squared_error: *mut f64,
) -> RanlatStatus {
    run(|| {
        let params = &as_ref(params, "params")?.0;
        let d = params.dim();
        let outcome = if randomized {
            let mut s = rng::stream(seed, Purpose::Cbc, &[]);
            construct::cbc_randomized(n, d, params, tau, &mut s)?
        } else {
            construct::cbc_deterministic(n, d, params)?
        };
        copy_out(&outcome.z, out_z, len, "out_z")?;
        if !out_squared_error.is_null() {
            out_squared_error.write(*outcome.step_errors.last().expect("dimension is positive"));
        }
        Ok(())
    })
}

/// Lattice rule estimate of a built-in test function (`"f1"` to `"f4"`) in
/// the rule's dimension. `shift` is null or points to `dim` values.
///
/// # Safety
/// `name` must be a NUL-terminated string; `shift` null or readable for `dim`
/// values; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ranlat_integrate_test_fn(
    name: *const c_char,
    rule: *const RanlatRule,
    shift: *const f64,
    out: *mut f64,
) -> RanlatStatus {
    run(|| {
        let kind: TestKind = str_arg(name, "name")?.parse()?;
        let rule = &as_ref(rule, "rule")?.0;
        let f = TestFunction::new(kind, rule.dim())?;
        let shift = shift_arg(shift, rule.dim())?;
        write_out(
            out,
            integrands::qmc_estimate(&f, rule, shift.as_ref())?,
            "out",
        )
    })
}

/// Fills `out` with a uniform random shift in `[0, 1)^len` drawn from `seed`,
/// matching the command line tool's `--shift-seed`.
///
/// # Safety
/// `out` must be writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn ranlat_sample_shift(seed: u64, out: *mut f64, len: usize) -> RanlatStatus {
    run(|| {
        let shift = construct::sample_shift(len, &mut rng::stream(seed, Purpose::Shift, &[]));
        copy_out(shift.delta(), out, len, "out")
    })
}
