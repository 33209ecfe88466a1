use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::ptr;

use outletcheck::fixtures::{write_golden, GOLDEN_CLAIM, GOLDEN_FACTUALITY};
use outletcheck_ffi::*;

fn take(s: *mut c_char) -> String {
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { oc_string_free(s) };
    text
}

fn last_error() -> String {
    let p = oc_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn open_golden(dir: &std::path::Path) -> *mut OcEngine {
    write_golden(dir).unwrap();
    let path = CString::new(dir.join("config.toml").to_str().unwrap()).unwrap();
    let mut engine = ptr::null_mut();
    assert_eq!(unsafe { oc_engine_open(path.as_ptr(), &mut engine) }, OcStatus::Ok);
    assert!(!engine.is_null());
    engine
}

#[test]
fn golden_claim_through_the_abi() {
    let dir = tempfile::tempdir().unwrap();
    let engine = open_golden(dir.path());
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { oc_profile_all_json(engine, &mut out) }, OcStatus::Ok);
    take(out);

    let claim = CString::new(GOLDEN_CLAIM).unwrap();
    assert_eq!(unsafe { oc_score_claim_json(engine, claim.as_ptr(), &mut out) }, OcStatus::Ok);
    let json: serde_like::Value = serde_like::parse(&take(out));
    assert!((json.factuality - GOLDEN_FACTUALITY).abs() < 1e-9);

    let domain = CString::new("https://www.reliable1.example/x").unwrap();
    assert_eq!(unsafe { oc_profile_json(engine, domain.as_ptr(), &mut out) }, OcStatus::Ok);
    assert!(take(out).contains("\"domain\": \"reliable1.example\""));

    let id = CString::new("g-r1-1").unwrap();
    assert_eq!(unsafe { oc_score_article_json(engine, id.as_ptr(), &mut out) }, OcStatus::Ok);
    assert!(take(out).contains("\"article_id\": \"g-r1-1\""));
    unsafe { oc_engine_free(engine) };
}

/// Minimal field extraction so this crate needs no JSON dependency.
mod serde_like {
    pub struct Value {
        pub factuality: f64,
    }

    pub fn parse(text: &str) -> Value {
        let line = text
            .lines()
            .find(|l| l.trim_start().starts_with("\"factuality\""))
            .expect("factuality field");
        let num = line.split(':').nth(1).unwrap().trim().trim_end_matches(',');
        Value {
            factuality: num.parse().unwrap(),
        }
    }
}

#[test]
fn error_codes_and_messages() {
    let dir = tempfile::tempdir().unwrap();
    let engine = open_golden(dir.path());
    let mut out = ptr::null_mut();

    let unknown = CString::new("nowhere.example").unwrap();
    assert_eq!(unsafe { oc_profile_json(engine, unknown.as_ptr(), &mut out) }, OcStatus::NotFound);
    assert!(last_error().contains("nowhere.example"));

    let empty = CString::new("  ").unwrap();
    assert_eq!(
        unsafe { oc_score_claim_json(engine, empty.as_ptr(), &mut out) },
        OcStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { oc_score_claim_json(engine, ptr::null(), &mut out) },
        OcStatus::NullPointer
    );
    assert_eq!(
        unsafe { oc_score_claim_json(ptr::null(), empty.as_ptr(), &mut out) },
        OcStatus::NullPointer
    );
    let bad_utf8 = [0xffu8 as c_char, 0];
    assert_eq!(
        unsafe { oc_score_claim_json(engine, bad_utf8.as_ptr(), &mut out) },
        OcStatus::InvalidUtf8
    );
    unsafe { oc_engine_free(engine) };

    let missing = CString::new(dir.path().join("absent.toml").to_str().unwrap()).unwrap();
    let mut engine = ptr::null_mut();
    assert_eq!(unsafe { oc_engine_open(missing.as_ptr(), &mut engine) }, OcStatus::Io);
    assert!(engine.is_null());
}

#[test]
fn scalar_functions() {
    let mut x = 0.0;
    assert_eq!(unsafe { oc_article_factuality(1.0, 0.0, 0.25, &mut x) }, OcStatus::Ok);
    assert_eq!(x, 0.25);
    assert_eq!(unsafe { oc_article_factuality(1.5, 0.0, 0.25, &mut x) }, OcStatus::InvalidArgument);

    let r = [0.9, 0.9, 0.9, 0.1];
    let s = [1.0, 1.0, 1.0, -1.0];
    assert_eq!(unsafe { oc_claim_raw_score(r.as_ptr(), s.as_ptr(), 4, &mut x) }, OcStatus::Ok);
    assert!((x - 2.6).abs() < 1e-12);
    assert_eq!(unsafe { oc_claim_raw_score(ptr::null(), ptr::null(), 0, &mut x) }, OcStatus::Ok);
    assert_eq!(x, 0.0);
    let bad = [0.5];
    assert_eq!(
        unsafe { oc_claim_raw_score(r.as_ptr(), bad.as_ptr(), 1, &mut x) },
        OcStatus::InvalidArgument
    );

    let url = CString::new("HTTP://User@WWW.Example.COM:8080/a?b#c").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { oc_normalize_domain(url.as_ptr(), &mut out) }, OcStatus::Ok);
    assert_eq!(take(out), "example.com");

    let v = unsafe { CStr::from_ptr(oc_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_is_current_and_compiles() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/outletcheck.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "oc_engine_open",
        "oc_engine_free",
        "oc_score_claim_json",
        "oc_profile_json",
        "oc_score_article_json",
        "oc_string_free",
        "oc_last_error_message",
        "OC_STATUS_NOT_FOUND",
        "typedef struct OcEngine OcEngine",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
    let Ok(status) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(&header)
        .status()
    else {
        eprintln!("no C compiler; syntax check skipped");
        return;
    };
    assert!(status.success());
}
