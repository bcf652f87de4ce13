use std::ffi::{c_char, CStr, CString};
use std::ptr;

use seclin_ffi::*;

const EXAMPLE: &str = include_str!("../../core/data/reference.json");
const EXAMPLE_SECURED: &str = include_str!("../../core/data/reference_secured.json");

fn load(text: &str) -> *mut SeclinScheme {
    let c = CString::new(text).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { seclin_scheme_load_json(c.as_ptr(), &mut h) }, SeclinStatus::Ok);
    assert!(!h.is_null());
    h
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(seclin_last_error()) }.to_string_lossy().into_owned()
}

fn take_string(p: *mut c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { seclin_string_free(p) };
    s
}

#[test]
fn load_check_secure_roundtrip() {
    let h = load(EXAMPLE);
    let (mut n, mut k, mut l) = (0, 0, 0);
    assert_eq!(unsafe { seclin_scheme_dims(h, &mut n, &mut k, &mut l) }, SeclinStatus::Ok);
    assert_eq!((n, k, l), (6, 4, 5));

    let mut out = ptr::null_mut();
    let mut pass = 0;
    assert_eq!(unsafe { seclin_check_json(h, &mut out, &mut pass) }, SeclinStatus::Ok);
    assert_eq!(pass, 1);
    let v: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
    assert_eq!(v["costs"]["delta"], "11/24");

    let mut ss = ptr::null_mut();
    assert_eq!(unsafe { seclin_secure(h, &mut ss) }, SeclinStatus::Ok);
    assert_eq!(unsafe { seclin_secured_x(ss) }, 2);
    let mut doc = ptr::null_mut();
    assert_eq!(unsafe { seclin_secured_to_json(ss, &mut doc) }, SeclinStatus::Ok);
    let text = take_string(doc);
    assert!(text.contains("\"C\""));

    let reloaded = load(&text);
    let mut own = ptr::null_mut();
    assert_eq!(unsafe { seclin_scheme_secured(reloaded, &mut own) }, SeclinStatus::Ok);
    unsafe {
        seclin_secured_free(own);
        seclin_scheme_free(reloaded);
        seclin_secured_free(ss);
        seclin_scheme_free(h);
    }
}

#[test]
fn audits_through_the_abi() {
    let h = load(EXAMPLE_SECURED);
    let mut ss = ptr::null_mut();
    assert_eq!(unsafe { seclin_scheme_secured(h, &mut ss) }, SeclinStatus::Ok);

    let (mut bound, mut m) = (0.0, 0.0);
    assert_eq!(unsafe { seclin_leakage_bound(ss, 0, 1.0, 1.0, &mut bound, &mut m) }, SeclinStatus::Ok);
    assert!((m - 14.0065).abs() < 1e-3);
    assert!((bound - (1.0 + m).ln()).abs() < 1e-12);

    let mut exact = 0.0;
    assert_eq!(unsafe { seclin_leakage_gaussian(ss, 0, 1.0, 1.0, &mut exact) }, SeclinStatus::Ok);
    assert!(exact > 0.0 && exact <= bound);

    let mut sc = 0.0;
    assert_eq!(unsafe { seclin_epsilon_to_sigma(ss, 0, 1.0, 0.01, &mut sc) }, SeclinStatus::Ok);
    assert_eq!(unsafe { seclin_leakage_bound(ss, 0, 1.0, sc, &mut bound, &mut m) }, SeclinStatus::Ok);
    assert!((bound - 0.01).abs() < 1e-9);

    let mut rate = 0.0;
    assert_eq!(unsafe { seclin_simulate(ss, 1, 100, 1.0, 10.0, 1e-6, &mut rate) }, SeclinStatus::Ok);
    assert_eq!(rate, 1.0);

    let (mut bits, mut zero) = (0.0, 0);
    assert_eq!(unsafe { seclin_audit_exact(ss, 0, &mut bits, &mut zero) }, SeclinStatus::InvalidArgument);
    assert!(last_error().contains("prime field"));
    unsafe {
        seclin_secured_free(ss);
        seclin_scheme_free(h);
    }
}

#[test]
fn exact_audit_over_gf() {
    let text = EXAMPLE.replace("\"real\"", "\"gf:5\"");
    let h = load(&text);
    let mut ss = ptr::null_mut();
    assert_eq!(unsafe { seclin_secure(h, &mut ss) }, SeclinStatus::Ok);
    for u in 0..4 {
        let (mut bits, mut zero) = (1.0, 0);
        assert_eq!(unsafe { seclin_audit_exact(ss, u, &mut bits, &mut zero) }, SeclinStatus::Ok);
        assert_eq!((bits, zero), (0.0, 1));
    }
    unsafe {
        seclin_secured_free(ss);
        seclin_scheme_free(h);
    }
}

#[test]
fn error_codes_and_messages() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { seclin_scheme_load_json(ptr::null(), &mut h) }, SeclinStatus::NullPointer);
    assert!(h.is_null());

    let bad = CString::new("{not json").unwrap();
    assert_eq!(unsafe { seclin_scheme_load_json(bad.as_ptr(), &mut h) }, SeclinStatus::Parse);
    assert!(!last_error().is_empty());

    let corrupt = CString::new(EXAMPLE.replacen("[3, 0, -3, 4, -1]", "[3, 0, -3, 4, 0]", 1)).unwrap();
    assert_eq!(unsafe { seclin_scheme_load_json(corrupt.as_ptr(), &mut h) }, SeclinStatus::Validation);
    assert!(last_error().contains("inconsistent factorization"));

    let dense = r#"{"field": "real", "N": 3, "K": 2, "L": 2, "F": [[1, 1], [1, 2]],
                    "D": [[1, 1, 1], [1, 2, 3]], "E": [[1, 0], [0, 1], [0, 0]]}"#;
    let h = load(dense);
    let mut ss = ptr::null_mut();
    assert_eq!(unsafe { seclin_secure(h, &mut ss) }, SeclinStatus::Insecure);
    assert!(ss.is_null());
    assert!(last_error().starts_with("insecure factorization"));
    let mut none = ptr::null_mut();
    assert_eq!(unsafe { seclin_scheme_secured(h, &mut none) }, SeclinStatus::InvalidArgument);
    unsafe { seclin_scheme_free(h) };

    let big = load(&EXAMPLE.replace("\"real\"", "\"gf:101\""));
    assert_eq!(unsafe { seclin_secure(big, &mut ss) }, SeclinStatus::Ok);
    let (mut bits, mut zero) = (0.0, 0);
    assert_eq!(unsafe { seclin_audit_exact(ss, 0, &mut bits, &mut zero) }, SeclinStatus::Infeasible);
    assert_eq!(unsafe { seclin_audit_exact(ss, 0, ptr::null_mut(), &mut zero) }, SeclinStatus::Infeasible);
    unsafe {
        seclin_secured_free(ss);
        seclin_scheme_free(big);
        seclin_scheme_free(ptr::null_mut());
        seclin_string_free(ptr::null_mut());
    }
    assert_eq!(unsafe { seclin_secured_x(ptr::null()) }, 0);
}

#[test]
fn success_clears_last_error() {
    let bad = CString::new("[]").unwrap();
    let mut h = ptr::null_mut();
    assert_ne!(unsafe { seclin_scheme_load_json(bad.as_ptr(), &mut h) }, SeclinStatus::Ok);
    let h = load(EXAMPLE);
    assert_eq!(last_error(), "");
    unsafe { seclin_scheme_free(h) };
    let v = unsafe { CStr::from_ptr(seclin_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

/// The generated header parses as C when a compiler is available.
#[test]
fn header_compiles() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/seclin.h");
    let text = std::fs::read_to_string(header).unwrap();
    for name in ["seclin_scheme_load_json", "seclin_audit_exact", "SECLIN_STATUS_INFEASIBLE", "typedef struct SeclinScheme"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(out) = std::process::Command::new("cc").args(["-fsyntax-only", "-x", "c", header]).output() else {
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
