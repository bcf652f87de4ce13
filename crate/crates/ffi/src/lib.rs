//! C ABI over `seclin`.
//!
//! Schemes and secured schemes are opaque handles created and released by
//! this library. Every fallible call returns a [`SeclinStatus`]; on failure the
//! message is available from [`seclin_last_error`] on the same thread. Strings
//! returned through `char **` out-parameters are owned by the caller and must be
//! released with [`seclin_string_free`]. User indices are zero-based.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use seclin::audit;
use seclin::report::to_canonical_json;
use seclin::scheme::{LoadedScheme, SchemeDocument};
use seclin::secrecy;
use seclin::simulate::{run_batch, Protocol, SimParams};
use seclin::transform::{self, SecuredScheme};
use seclin::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeclinStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed JSON or matrix entries.
    Parse = 3,
    /// Shapes, dimensions or `D·E = F` violated.
    Validation = 4,
    /// The reduced-rank condition fails, or leakage is unbounded.
    Insecure = 5,
    /// The exhaustive audit would exceed its state limit.
    Infeasible = 6,
    InvalidArgument = 7,
    /// A Rust panic was caught at the boundary.
    Panic = 8,
}

/// A loaded scheme, with its randomness coefficients if the document had them.
pub struct SeclinScheme(LoadedScheme);

/// A scheme with randomness coefficients.
pub struct SeclinSecured(SecuredScheme);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> SeclinStatus {
    match e {
        Error::Parse(_) | Error::Json(_) | Error::InvalidField(_) => SeclinStatus::Parse,
        Error::InsecureFactorization { .. } | Error::UnboundedLeakage { .. } | Error::SingularCovariance { .. } => {
            SeclinStatus::Insecure
        }
        Error::EnumerationInfeasible { .. } => SeclinStatus::Infeasible,
        Error::InvalidArgument(_) | Error::Io(_) => SeclinStatus::InvalidArgument,
        _ => SeclinStatus::Validation,
    }
}

struct Failure(SeclinStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SeclinStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status and the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SeclinStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SeclinStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal panic: {msg}"));
            SeclinStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(SeclinStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn give_string(s: String, out: &mut *mut c_char) -> Result<(), Failure> {
    *out = CString::new(s)
        .map_err(|_| Failure(SeclinStatus::InvalidArgument, "string contains NUL".into()))?
        .into_raw();
    Ok(())
}

fn json(v: &serde_json::Value) -> Result<String, Failure> {
    to_canonical_json(v).map_err(|e| Error::Json(e).into())
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn seclin_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn seclin_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses and validates a scheme document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seclin_scheme_load_json(json: *const c_char, out: *mut *mut SeclinScheme) -> SeclinStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let text = read_str(json, "json")?;
        let loaded = SchemeDocument::from_json(text)?.load()?;
        *out = Box::into_raw(Box::new(SeclinScheme(loaded)));
        Ok(())
    })
}

/// # Safety
/// `s` must come from [`seclin_scheme_load_json`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn seclin_scheme_free(s: *mut SeclinScheme) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Servers, users and messages.
///
/// # Safety
/// `s` must be a live handle; the out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn seclin_scheme_dims(
    s: *const SeclinScheme,
    n: *mut usize,
    k: *mut usize,
    l: *mut usize,
) -> SeclinStatus {
    guard(|| {
        let base = borrow(s, "scheme")?.0.base();
        *out_ref(n, "n")? = base.n();
        *out_ref(k, "k")? = base.k();
        *out_ref(l, "l")? = base.l();
        Ok(())
    })
}

/// Secrecy and cost report as JSON; `all_pass` receives 1 when every
/// applicable check passes.
///
/// # Safety
/// `s` must be a live handle; `out_json` and `all_pass` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seclin_check_json(
    s: *const SeclinScheme,
    out_json: *mut *mut c_char,
    all_pass: *mut i32,
) -> SeclinStatus {
    guard(|| {
        let loaded = &borrow(s, "scheme")?.0;
        let out_json = out_ref(out_json, "out_json")?;
        let pass = out_ref(all_pass, "all_pass")?;
        let base = loaded.base();
        let report = secrecy::full_report(base, loaded.secured());
        *pass = report.all_pass() as i32;
        let doc = serde_json::json!({
            "costs": base.costs(),
            "schedule": base.schedule(),
            "secrecy": report,
        });
        give_string(json(&doc)?, out_json)
    })
}

/// Secures the scheme with the canonical `Null(D)` basis. Fails with
/// `SECLIN_STATUS_INSECURE` when some user breaks the reduced-rank condition.
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seclin_secure(s: *const SeclinScheme, out: *mut *mut SeclinSecured) -> SeclinStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let ss = transform::secure(borrow(s, "scheme")?.0.base())?;
        *out = Box::into_raw(Box::new(SeclinSecured(ss)));
        Ok(())
    })
}

/// The randomness coefficients carried by the loaded document itself.
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seclin_scheme_secured(s: *const SeclinScheme, out: *mut *mut SeclinSecured) -> SeclinStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let ss = borrow(s, "scheme")?
            .0
            .secured()
            .ok_or_else(|| Failure(SeclinStatus::InvalidArgument, "document has no randomness coefficients".into()))?
            .clone();
        *out = Box::into_raw(Box::new(SeclinSecured(ss)));
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn seclin_secured_free(s: *mut SeclinSecured) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of randomness symbols, or 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn seclin_secured_x(s: *const SeclinSecured) -> usize {
    s.as_ref().map_or(0, |s| s.0.x())
}

/// The secured scheme as a document including `"C"`.
///
/// # Safety
/// `s` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seclin_secured_to_json(s: *const SeclinSecured, out_json: *mut *mut c_char) -> SeclinStatus {
    guard(|| {
        let doc = borrow(s, "secured")?.0.to_document();
        give_string(doc.to_json_pretty(), out_json.as_mut().ok_or_else(|| null("out_json"))?)
    })
}

/// Exact leakage in bits by exhaustive enumeration (prime fields only).
///
/// # Safety
/// `s` must be a live handle; `bits` and `exact_zero` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seclin_audit_exact(
    s: *const SeclinSecured,
    user: usize,
    bits: *mut f64,
    exact_zero: *mut i32,
) -> SeclinStatus {
    guard(|| {
        let g = audit::exact_leakage_gf(&borrow(s, "secured")?.0, user)?;
        *out_ref(bits, "bits")? = g.bits;
        *out_ref(exact_zero, "exact_zero")? = g.exact_zero as i32;
        Ok(())
    })
}

/// Leakage bound in nats and the ratio `M_k` (real schemes only).
///
/// # Safety
/// `s` must be a live handle; `bound` and `m_k` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seclin_leakage_bound(
    s: *const SeclinSecured,
    user: usize,
    sigma_w: f64,
    sigma_c: f64,
    bound: *mut f64,
    m_k: *mut f64,
) -> SeclinStatus {
    guard(|| {
        let r = audit::leakage_bound_real(&borrow(s, "secured")?.0, user, sigma_w, sigma_c)?;
        *out_ref(bound, "bound")? = r.bound;
        *out_ref(m_k, "m_k")? = r.m_k;
        Ok(())
    })
}

/// Exact Gaussian leakage in nats (real schemes only).
///
/// # Safety
/// `s` must be a live handle; `nats` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seclin_leakage_gaussian(
    s: *const SeclinSecured,
    user: usize,
    sigma_w: f64,
    sigma_c: f64,
    nats: *mut f64,
) -> SeclinStatus {
    guard(|| {
        let v = audit::exact_leakage_gaussian(&borrow(s, "secured")?.0, user, sigma_w, sigma_c)?;
        *out_ref(nats, "nats")? = v;
        Ok(())
    })
}

/// Smallest σ_c whose bound is at most `eps` nats.
///
/// # Safety
/// `s` must be a live handle; `sigma_c` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seclin_epsilon_to_sigma(
    s: *const SeclinSecured,
    user: usize,
    sigma_w: f64,
    eps: f64,
    sigma_c: *mut f64,
) -> SeclinStatus {
    guard(|| {
        let v = audit::epsilon_to_sigma(&borrow(s, "secured")?.0, user, sigma_w, eps)?;
        *out_ref(sigma_c, "sigma_c")? = v;
        Ok(())
    })
}

/// Runs `trials` seeded protocol trials; `success_rate` is the fraction of
/// (trial, user) pairs that decoded correctly.
///
/// # Safety
/// `s` must be a live handle; `success_rate` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seclin_simulate(
    s: *const SeclinSecured,
    seed: u64,
    trials: u64,
    sigma_w: f64,
    sigma_c: f64,
    tol: f64,
    success_rate: *mut f64,
) -> SeclinStatus {
    guard(|| {
        let ss = &borrow(s, "secured")?.0;
        let params = SimParams {
            seed,
            sigma_w,
            sigma_c,
            tol,
        };
        let (r, _) = run_batch(&Protocol::new(ss), &params, trials, false)?;
        *out_ref(success_rate, "success_rate")? = r.success_rate;
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn seclin_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
