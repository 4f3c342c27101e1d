use std::ffi::CStr;
use std::ptr;

use eisenrel_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(eisenrel_last_error_message()) }.to_string_lossy().into_owned()
}

#[test]
fn series_lifecycle() {
    let mut s: *mut EisenrelSeries = ptr::null_mut();
    let st = unsafe { eisenrel_series_new(1, 4, 0, 0, 4, &mut s) };
    assert_eq!(st, EisenrelStatus::Ok);
    assert!(!s.is_null());
    assert_eq!(unsafe { eisenrel_series_level(s) }, 1);
    assert_eq!(unsafe { eisenrel_series_order(s) }, 4);

    let mut json: *mut std::ffi::c_char = ptr::null_mut();
    assert_eq!(unsafe { eisenrel_series_to_json(s, &mut json) }, EisenrelStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    unsafe { eisenrel_string_free(json) };
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["level"], 1);
    assert_eq!(v["coeffs"][1]["c"][0], serde_json::json!([-2, 1]));

    // -1/120 - 2q - 18q^2 - 56q^3 at tau = i.
    let (mut re, mut im) = (0.0, 0.0);
    assert_eq!(unsafe { eisenrel_series_eval(s, 0.0, 1.0, &mut re, &mut im) }, EisenrelStatus::Ok);
    let q = (-2.0 * std::f64::consts::PI).exp();
    let expect = -1.0 / 120.0 - 2.0 * q - 18.0 * q * q - 56.0 * q * q * q;
    assert!((re - expect).abs() < 1e-15 && im.abs() < 1e-15);

    assert_eq!(
        unsafe { eisenrel_series_eval(s, 0.0, -1.0, &mut re, &mut im) },
        EisenrelStatus::NumericDomain
    );
    unsafe { eisenrel_series_free(s) };
    unsafe { eisenrel_series_free(ptr::null_mut()) };
}

#[test]
fn error_codes_and_messages() {
    let mut s: *mut EisenrelSeries = ptr::null_mut();
    let st = unsafe { eisenrel_series_new(4, 2, 0, 0, 10, &mut s) };
    assert_eq!(st, EisenrelStatus::NonHolomorphic);
    assert!(s.is_null());
    assert_eq!(last_error(), "non-holomorphic series E^(2)_{(0,0)} excluded");

    assert_eq!(unsafe { eisenrel_series_new(4, 3, 1, 0, 10, ptr::null_mut()) }, EisenrelStatus::NullPointer);
    assert_eq!(unsafe { eisenrel_series_new(0, 3, 1, 0, 10, &mut s) }, EisenrelStatus::InvalidArgument);
    assert_eq!(unsafe { eisenrel_series_level(ptr::null()) }, 0);

    let (mut zero, mut first) = (0, 0);
    let st = unsafe { eisenrel_verify_relation(3, 0, 0, 1, 0, 2, 0, 20, &mut zero, &mut first) };
    assert_eq!(st, EisenrelStatus::InvalidInstance);
    assert!(!last_error().is_empty());
}

#[test]
fn verify_and_evaluate() {
    let (mut zero, mut first) = (0, 0);
    let st = unsafe { eisenrel_verify_relation(3, 0, 0, 1, 0, 0, 1, 40, &mut zero, &mut first) };
    assert_eq!(st, EisenrelStatus::Ok);
    assert_eq!((zero, first), (1, -1));
    assert!(last_error().is_empty());

    let (mut re, mut im) = (1.0, 1.0);
    let st = unsafe { eisenrel_eval_fourier(1, 0.0, 0.0, 0.3, 1.1, 80, &mut re, &mut im) };
    assert_eq!(st, EisenrelStatus::Ok);
    assert_eq!((re, im), (0.0, 0.0));
    let st = unsafe { eisenrel_eval_fourier(2, 0.0, 0.0, 0.3, 1.1, 80, &mut re, &mut im) };
    assert_eq!(st, EisenrelStatus::NumericDomain);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(eisenrel_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/eisenrel.h")).unwrap();
    for name in [
        "typedef struct EisenrelSeries EisenrelSeries",
        "EISENREL_STATUS_OK = 0",
        "eisenrel_series_new",
        "eisenrel_series_free",
        "eisenrel_series_eval",
        "eisenrel_series_to_json",
        "eisenrel_string_free",
        "eisenrel_verify_relation",
        "eisenrel_eval_fourier",
        "eisenrel_last_error_message",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/eisenrel.h");
    let Ok(status) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", header])
        .status()
    else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(status.success());
}
