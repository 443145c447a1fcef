//! C interface to `bci-core`.
//!
//! Every function returns a [`BciStatus`]; results go through out-pointers.
//! On failure the out-pointers are left untouched and a message is stored
//! for the calling thread (see [`bci_last_error_message`]).

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bci_core::branch::{branch_log, branch_pow, BranchAngle, ProblemInstance, Regime};
use bci_core::closed_form::{eval_power_series, eval_rational, eval_theorem, MethodResult, RationalBeta};
use bci_core::hyp2f1::hyp2f1_one_b;
use bci_core::ode::ode_residual;
use bci_core::quadrature::circle_integral;
use bci_core::report::{default_methods, evaluate, RenderOptions, ReportJson};
use bci_core::Error;
use num_complex::Complex64;

/// Result code of every `bci_*` call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BciStatus {
    Ok = 0,
    /// A required pointer was null.
    NullPointer = 1,
    InvalidAngle = 2,
    InvalidTolerance = 3,
    NonFinite = 4,
    ZeroInput = 5,
    OnBranchCut = 6,
    PoleHit = 7,
    AlphaOnCircle = 8,
    AlphaOnCut = 9,
    InvalidC = 10,
    OutsideDisc = 11,
    NoConvergence = 12,
    BetaNonNegativeInteger = 13,
    IntegerBeta = 14,
    InvalidRational = 15,
    BetaMismatch = 16,
    SingularPath = 17,
    DivergentAtZero = 18,
    RegimeStraddle = 19,
    NotApplicable = 20,
    /// A Rust panic was caught at the boundary.
    Internal = 99,
}

impl From<&Error> for BciStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidAngle(_) => BciStatus::InvalidAngle,
            Error::InvalidTolerance(_) => BciStatus::InvalidTolerance,
            Error::NonFinite => BciStatus::NonFinite,
            Error::ZeroInput => BciStatus::ZeroInput,
            Error::OnBranchCut { .. } => BciStatus::OnBranchCut,
            Error::PoleHit => BciStatus::PoleHit,
            Error::AlphaOnCircle { .. } => BciStatus::AlphaOnCircle,
            Error::AlphaOnCut => BciStatus::AlphaOnCut,
            Error::InvalidC(_) => BciStatus::InvalidC,
            Error::OutsideDisc(_) => BciStatus::OutsideDisc,
            Error::NoConvergence { .. } => BciStatus::NoConvergence,
            Error::BetaNonNegativeInteger => BciStatus::BetaNonNegativeInteger,
            Error::IntegerBeta => BciStatus::IntegerBeta,
            Error::InvalidRational { .. } => BciStatus::InvalidRational,
            Error::BetaMismatch { .. } => BciStatus::BetaMismatch,
            Error::SingularPath => BciStatus::SingularPath,
            Error::DivergentAtZero => BciStatus::DivergentAtZero,
            Error::RegimeStraddle => BciStatus::RegimeStraddle,
            Error::NotApplicable(_) => BciStatus::NotApplicable,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BciComplex {
    pub re: f64,
    pub im: f64,
}

impl From<BciComplex> for Complex64 {
    fn from(z: BciComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

impl From<Complex64> for BciComplex {
    fn from(z: Complex64) -> Self {
        BciComplex { re: z.re, im: z.im }
    }
}

/// Value of one method together with its error estimate.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BciResult {
    pub value: BciComplex,
    pub error_estimate: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BciRegime {
    Inside = 0,
    Outside = 1,
}

/// Validated problem instance. Create with [`bci_instance_new`], release
/// with [`bci_instance_free`].
pub struct BciInstance {
    inner: ProblemInstance,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    // interior NULs cannot come from our messages, but never panic here
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(e: &Error) -> BciStatus {
    set_last_error(format!("{}: {e}", e.kind()));
    BciStatus::from(e)
}

/// Runs `f` with the last error cleared and panics turned into `Internal`.
fn guard(f: impl FnOnce() -> BciStatus) -> BciStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal error: {msg}"));
            BciStatus::Internal
        }
    }
}

fn null_pointer(name: &str) -> BciStatus {
    set_last_error(format!("NullPointer: `{name}` must not be null"));
    BciStatus::NullPointer
}

/// Writes `v` through `out` or reports the error.
///
/// # Safety
/// `out` must be null or valid for a write of `T`.
unsafe fn deliver<T>(r: bci_core::Result<T>, out: *mut T, name: &str) -> BciStatus {
    if out.is_null() {
        return null_pointer(name);
    }
    match r {
        Ok(v) => {
            // SAFETY: non-null and valid per the caller's contract
            unsafe { out.write(v) };
            BciStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

fn as_result(r: bci_core::Result<MethodResult>) -> bci_core::Result<BciResult> {
    r.map(|m| BciResult { value: m.value.into(), error_estimate: m.error_estimate })
}

/// # Safety
/// `inst` must be null or a live pointer from [`bci_instance_new`].
unsafe fn instance<'a>(inst: *const BciInstance) -> Option<&'a ProblemInstance> {
    // SAFETY: see the function contract
    unsafe { inst.as_ref() }.map(|i| &i.inner)
}

const STATUS_NAMES: [(BciStatus, &CStr); 22] = [
    (BciStatus::Ok, c"Ok"),
    (BciStatus::NullPointer, c"NullPointer"),
    (BciStatus::InvalidAngle, c"InvalidAngle"),
    (BciStatus::InvalidTolerance, c"InvalidTolerance"),
    (BciStatus::NonFinite, c"NonFinite"),
    (BciStatus::ZeroInput, c"ZeroInput"),
    (BciStatus::OnBranchCut, c"OnBranchCut"),
    (BciStatus::PoleHit, c"PoleHit"),
    (BciStatus::AlphaOnCircle, c"AlphaOnCircle"),
    (BciStatus::AlphaOnCut, c"AlphaOnCut"),
    (BciStatus::InvalidC, c"InvalidC"),
    (BciStatus::OutsideDisc, c"OutsideDisc"),
    (BciStatus::NoConvergence, c"NoConvergence"),
    (BciStatus::BetaNonNegativeInteger, c"BetaNonNegativeInteger"),
    (BciStatus::IntegerBeta, c"IntegerBeta"),
    (BciStatus::InvalidRational, c"InvalidRational"),
    (BciStatus::BetaMismatch, c"BetaMismatch"),
    (BciStatus::SingularPath, c"SingularPath"),
    (BciStatus::DivergentAtZero, c"DivergentAtZero"),
    (BciStatus::RegimeStraddle, c"RegimeStraddle"),
    (BciStatus::NotApplicable, c"NotApplicable"),
    (BciStatus::Internal, c"Internal"),
];

/// Static, NUL-terminated name of a status code (e.g. `"AlphaOnCircle"`),
/// or `"Unknown"` for values that are not a `BciStatus`.
#[no_mangle]
pub extern "C" fn bci_status_name(status: c_int) -> *const c_char {
    STATUS_NAMES.iter().find(|(s, _)| *s as c_int == status).map_or(c"Unknown", |(_, name)| name).as_ptr()
}

/// Message for the most recent failed call on this thread, or null when the
/// last call succeeded. The pointer stays valid until the next `bci_*` call
/// on the same thread.
#[no_mangle]
pub extern "C" fn bci_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bci_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Validates and allocates an instance. `exclusion_band` is the half-width of
/// the rejected annulus around `|alpha| = 1` (0.02 is the usual choice).
///
/// # Safety
/// `out` must be valid for writing one pointer. On success `*out` owns the
/// instance and must be released with [`bci_instance_free`].
#[no_mangle]
pub unsafe extern "C" fn bci_instance_new(
    alpha: BciComplex,
    beta: BciComplex,
    theta: f64,
    tol: f64,
    exclusion_band: f64,
    out: *mut *mut BciInstance,
) -> BciStatus {
    guard(|| {
        let r = BranchAngle::new(theta)
            .and_then(|th| ProblemInstance::with_band(alpha.into(), beta.into(), th, tol, exclusion_band))
            .map(|inner| Box::into_raw(Box::new(BciInstance { inner })));
        // SAFETY: forwarded caller contract
        unsafe { deliver(r, out, "out") }
    })
}

/// Releases an instance. Null is ignored.
///
/// # Safety
/// `inst` must be null or a pointer from [`bci_instance_new`] that has not
/// been freed yet.
#[no_mangle]
pub unsafe extern "C" fn bci_instance_free(inst: *mut BciInstance) {
    if !inst.is_null() {
        // SAFETY: allocated by Box::into_raw in bci_instance_new
        drop(unsafe { Box::from_raw(inst) });
    }
}

/// Whether `alpha` lies inside or outside the unit circle.
///
/// # Safety
/// `inst` must be a live instance; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn bci_instance_regime(inst: *const BciInstance, out: *mut BciRegime) -> BciStatus {
    guard(|| {
        // SAFETY: caller contract
        let Some(i) = (unsafe { instance(inst) }) else { return null_pointer("inst") };
        let r = match i.regime() {
            Regime::Inside => BciRegime::Inside,
            Regime::Outside => BciRegime::Outside,
        };
        // SAFETY: caller contract
        unsafe { deliver(Ok(r), out, "out") }
    })
}

/// Closed hypergeometric form (residues for integer `beta`).
///
/// # Safety
/// `inst` must be a live instance; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn bci_eval_theorem(inst: *const BciInstance, out: *mut BciResult) -> BciStatus {
    guard(|| {
        // SAFETY: caller contract
        let Some(i) = (unsafe { instance(inst) }) else { return null_pointer("inst") };
        // SAFETY: caller contract
        unsafe { deliver(as_result(eval_theorem(i)), out, "out") }
    })
}

/// Direct power series, `|alpha| < 1` only. `max_terms = 0` uses the default.
///
/// # Safety
/// `inst` must be a live instance; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn bci_eval_series(inst: *const BciInstance, max_terms: usize, out: *mut BciResult) -> BciStatus {
    guard(|| {
        // SAFETY: caller contract
        let Some(i) = (unsafe { instance(inst) }) else { return null_pointer("inst") };
        let terms = if max_terms == 0 { bci_core::closed_form::DEFAULT_SERIES_TERMS } else { max_terms };
        // SAFETY: caller contract
        unsafe { deliver(as_result(eval_power_series(i, terms)), out, "out") }
    })
}

/// Adaptive quadrature around the circle.
///
/// # Safety
/// `inst` must be a live instance; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn bci_eval_quadrature(inst: *const BciInstance, out: *mut BciResult) -> BciStatus {
    guard(|| {
        // SAFETY: caller contract
        let Some(i) = (unsafe { instance(inst) }) else { return null_pointer("inst") };
        let r = circle_integral(i)
            .and_then(|q| q.require_converged())
            .map(|q| BciResult { value: q.value.into(), error_estimate: q.abs_error_estimate });
        // SAFETY: caller contract
        unsafe { deliver(r, out, "out") }
    })
}

/// Finite logarithm sum for `beta = m/n`; the instance's `beta` must match.
///
/// # Safety
/// `inst` must be a live instance; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn bci_eval_rational(inst: *const BciInstance, m: i64, n: i64, out: *mut BciResult) -> BciStatus {
    guard(|| {
        // SAFETY: caller contract
        let Some(i) = (unsafe { instance(inst) }) else { return null_pointer("inst") };
        let r = RationalBeta::new(m, n).and_then(|b| eval_rational(i, b));
        // SAFETY: caller contract
        unsafe { deliver(as_result(r), out, "out") }
    })
}

/// Runs the default methods and returns the JSON report (same layout as
/// `bci eval --format jsonl`). Free the string with [`bci_string_free`].
///
/// # Safety
/// `inst` must be a live instance; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn bci_evaluate_json(inst: *const BciInstance, out: *mut *mut c_char) -> BciStatus {
    guard(|| {
        // SAFETY: caller contract
        let Some(i) = (unsafe { instance(inst) }) else { return null_pointer("inst") };
        let report = evaluate(i, &default_methods(i));
        let json = serde_json::to_string(&ReportJson::new(&report, RenderOptions::default()))
            .expect("report serialisation is infallible");
        let s = CString::new(json).expect("JSON has no interior NUL").into_raw();
        // SAFETY: caller contract
        unsafe { deliver(Ok(s), out, "out") }
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bci_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: produced by CString::into_raw
        drop(unsafe { CString::from_raw(s) });
    }
}

/// `₂F₁(1, b; 1+b; z)` for `|z| < 1`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn bci_hyp2f1_one_b(b: BciComplex, z: BciComplex, tol: f64, out: *mut BciResult) -> BciStatus {
    guard(|| {
        let r = hyp2f1_one_b(b.into(), z.into(), tol).and_then(|s| {
            if s.converged {
                Ok(BciResult { value: s.value.into(), error_estimate: s.tail_estimate })
            } else {
                Err(Error::NoConvergence { value: s.value, estimate: s.tail_estimate })
            }
        });
        // SAFETY: caller contract
        unsafe { deliver(r, out, "out") }
    })
}

/// Logarithm with the cut along angle `theta`, `arg ∈ (theta − 2π, theta)`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn bci_branch_log(z: BciComplex, theta: f64, out: *mut BciComplex) -> BciStatus {
    guard(|| {
        let r = BranchAngle::new(theta).and_then(|th| branch_log(z.into(), th)).map(|l| l.log_value.into());
        // SAFETY: caller contract
        unsafe { deliver(r, out, "out") }
    })
}

/// `z^beta` on the branch with the cut along angle `theta`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn bci_branch_pow(
    z: BciComplex,
    beta: BciComplex,
    theta: f64,
    out: *mut BciComplex,
) -> BciStatus {
    guard(|| {
        let r = BranchAngle::new(theta).and_then(|th| branch_pow(z.into(), beta.into(), th)).map(Into::into);
        // SAFETY: caller contract
        unsafe { deliver(r, out, "out") }
    })
}

/// Relative residual of the closed form in its differential equation, using
/// five-point differences with step `h`.
///
/// # Safety
/// `inst` must be a live instance; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn bci_ode_residual(inst: *const BciInstance, h: f64, out: *mut f64) -> BciStatus {
    guard(|| {
        // SAFETY: caller contract
        let Some(i) = (unsafe { instance(inst) }) else { return null_pointer("inst") };
        // SAFETY: caller contract
        unsafe { deliver(ode_residual(i, h).map(|r| r.relative_residual), out, "out") }
    })
}
