//! C interface to `eisenrel`.
//!
//! Every fallible function returns an [`EisenrelStatus`]; on failure a
//! message is kept per thread and can be read with
//! [`eisenrel_last_error_message`]. Series are exposed as opaque
//! [`EisenrelSeries`] handles that the caller releases with
//! [`eisenrel_series_free`]. Strings returned by the library are released
//! with [`eisenrel_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, UnwindSafe};

use eisenrel::eisenstein::eisenstein_qexp;
use eisenrel::numeric::{eval_e_fourier, NumericConfig, TorusPoint};
use eisenrel::relations::verify_instance;
use eisenrel::{EisensteinIndex, Error, QExpansion, RelationInstance};
use num_complex::Complex64;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EisenrelStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NonHolomorphic = 3,
    InvalidInstance = 4,
    NumericDomain = 5,
    Internal = 6,
}

/// Opaque handle to an exact truncated q-expansion.
pub struct EisenrelSeries {
    inner: QExpansion,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> EisenrelStatus {
    match e {
        Error::NonHolomorphic => EisenrelStatus::NonHolomorphic,
        Error::InvalidInstance(_) => EisenrelStatus::InvalidInstance,
        Error::NotUpperHalfPlane(_) | Error::LatticePoint | Error::LatticeWeight(_) | Error::StepTooLarge { .. } => {
            EisenrelStatus::NumericDomain
        }
        _ => EisenrelStatus::InvalidArgument,
    }
}

fn guarded<F>(f: F) -> EisenrelStatus
where
    F: FnOnce() -> Result<(), (EisenrelStatus, String)> + UnwindSafe,
{
    match catch_unwind(f) {
        Ok(Ok(())) => {
            set_error("");
            EisenrelStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            EisenrelStatus::Internal
        }
    }
}

fn lift(e: Error) -> (EisenrelStatus, String) {
    (status_of(&e), e.to_string())
}

fn null() -> (EisenrelStatus, String) {
    (EisenrelStatus::NullPointer, "null pointer argument".into())
}

/// Message describing the last failure on this thread (empty after a success).
/// The pointer stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn eisenrel_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn eisenrel_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Builds the expansion of `E^(weight;level)_(a1,a2)` to order `order`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn eisenrel_series_new(
    level: u32,
    weight: u32,
    a1: i64,
    a2: i64,
    order: u32,
    out: *mut *mut EisenrelSeries,
) -> EisenrelStatus {
    guarded(move || {
        if out.is_null() {
            return Err(null());
        }
        if order == 0 {
            return Err((EisenrelStatus::InvalidArgument, "order must be positive".into()));
        }
        let idx = EisensteinIndex::new(weight, level, a1, a2).map_err(lift)?;
        let handle = Box::new(EisenrelSeries {
            inner: eisenstein_qexp(&idx, order),
        });
        // SAFETY: checked non-null above; the caller guarantees validity.
        unsafe { *out = Box::into_raw(handle) };
        Ok(())
    })
}

/// Releases a handle from [`eisenrel_series_new`]. Null is ignored.
///
/// # Safety
/// `series` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eisenrel_series_free(series: *mut EisenrelSeries) {
    if !series.is_null() {
        // SAFETY: the handle came from Box::into_raw in eisenrel_series_new.
        drop(unsafe { Box::from_raw(series) });
    }
}

/// Level of the series, or 0 for a null handle.
///
/// # Safety
/// `series` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn eisenrel_series_level(series: *const EisenrelSeries) -> u32 {
    // SAFETY: caller contract.
    unsafe { series.as_ref() }.map_or(0, |s| s.inner.level())
}

/// Truncation order of the series, or 0 for a null handle.
///
/// # Safety
/// `series` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn eisenrel_series_order(series: *const EisenrelSeries) -> u32 {
    // SAFETY: caller contract.
    unsafe { series.as_ref() }.map_or(0, |s| s.inner.order())
}

/// Evaluates the truncated series at `tau` with `zeta_N = exp(2 pi i/N)`.
///
/// # Safety
/// `series` must be a live handle; `out_re` and `out_im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eisenrel_series_eval(
    series: *const EisenrelSeries,
    tau_re: f64,
    tau_im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> EisenrelStatus {
    guarded(move || {
        // SAFETY: caller contract.
        let s = unsafe { series.as_ref() }.ok_or_else(null)?;
        if out_re.is_null() || out_im.is_null() {
            return Err(null());
        }
        let v = s.inner.eval_numeric(Complex64::new(tau_re, tau_im)).map_err(lift)?;
        // SAFETY: checked non-null above.
        unsafe {
            *out_re = v.re;
            *out_im = v.im;
        }
        Ok(())
    })
}

/// Writes the JSON form of the series to `*out`; free it with [`eisenrel_string_free`].
///
/// # Safety
/// `series` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn eisenrel_series_to_json(series: *const EisenrelSeries, out: *mut *mut c_char) -> EisenrelStatus {
    guarded(move || {
        // SAFETY: caller contract.
        let s = unsafe { series.as_ref() }.ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let text = s.inner.to_json().to_string();
        let c = CString::new(text).map_err(|e| (EisenrelStatus::Internal, e.to_string()))?;
        // SAFETY: checked non-null above.
        unsafe { *out = c.into_raw() };
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eisenrel_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: the string came from CString::into_raw.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Verifies the relation of split `(k1, k2)` at `a`, `b`, `c = -a - b` to order `order`.
/// On success `*residual_zero` is 1 or 0 and `*first_nonzero` is the first
/// nonzero exponent (in units of `1/N`) or -1.
///
/// # Safety
/// `residual_zero` and `first_nonzero` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn eisenrel_verify_relation(
    level: u32,
    k1: u32,
    k2: u32,
    a1: i64,
    a2: i64,
    b1: i64,
    b2: i64,
    order: u32,
    residual_zero: *mut i32,
    first_nonzero: *mut i64,
) -> EisenrelStatus {
    guarded(move || {
        if residual_zero.is_null() || first_nonzero.is_null() {
            return Err(null());
        }
        if order == 0 {
            return Err((EisenrelStatus::InvalidArgument, "order must be positive".into()));
        }
        let inst = RelationInstance::new(level, k1, k2, (a1, a2), (b1, b2)).map_err(lift)?;
        let report = verify_instance(&inst, order).map_err(lift)?;
        // SAFETY: checked non-null above.
        unsafe {
            *residual_zero = report.residual_zero as i32;
            *first_nonzero = report.first_nonzero_exponent.map_or(-1, i64::from);
        }
        Ok(())
    })
}

/// `E^(k)_z(tau)` at `z = x1 tau + x2` from the Fourier expansion with `fourier_terms` terms.
///
/// # Safety
/// `out_re` and `out_im` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn eisenrel_eval_fourier(
    weight: u32,
    x1: f64,
    x2: f64,
    tau_re: f64,
    tau_im: f64,
    fourier_terms: u32,
    out_re: *mut f64,
    out_im: *mut f64,
) -> EisenrelStatus {
    guarded(move || {
        if out_re.is_null() || out_im.is_null() {
            return Err(null());
        }
        let cfg = NumericConfig {
            tau: Complex64::new(tau_re, tau_im),
            fourier_terms,
            ..Default::default()
        };
        let v = eval_e_fourier(weight, TorusPoint::new(x1, x2), &cfg).map_err(lift)?;
        // SAFETY: checked non-null above.
        unsafe {
            *out_re = v.re;
            *out_im = v.im;
        }
        Ok(())
    })
}
