//! C ABI for the outletcheck engine.
//!
//! Every fallible call returns an [`OcStatus`]. On failure the message is
//! available from [`oc_last_error_message`] on the same thread. Strings
//! returned through `out` pointers are owned by the caller and must be
//! released with [`oc_string_free`]. JSON outputs are the same canonical
//! text the CLI prints.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use outletcheck::verdict::{article_factuality, claim_raw_score, EvidenceItem};
use outletcheck::stance::StanceLabel;
use outletcheck::{canonical, Engine, Error};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    NotFound = 4,
    Io = 5,
    Data = 6,
    Internal = 7,
}

/// Opaque engine handle.
pub struct OcEngine {
    inner: Engine,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn status_of(e: &Error) -> OcStatus {
    match e {
        Error::MissingProfile(_) | Error::UnknownArticle(_) => OcStatus::NotFound,
        Error::Io { .. } => OcStatus::Io,
        Error::EmptyClaim
        | Error::Validation(_)
        | Error::NoHost(_)
        | Error::Config(_)
        | Error::OracleRefused(_)
        | Error::DimensionMismatch { .. } => OcStatus::InvalidArgument,
        _ => OcStatus::Data,
    }
}

/// Runs `f`, recording the error message and converting panics.
fn guard(f: impl FnOnce() -> Result<(), (OcStatus, String)>) -> OcStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OcStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            OcStatus::Internal
        }
    }
}

fn engine_err(e: Error) -> (OcStatus, String) {
    (status_of(&e), e.to_string())
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (OcStatus, String)> {
    if p.is_null() {
        return Err((OcStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (OcStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn engine_ref<'a>(engine: *const OcEngine) -> Result<&'a Engine, (OcStatus, String)> {
    engine
        .as_ref()
        .map(|e| &e.inner)
        .ok_or((OcStatus::NullPointer, "engine is null".to_string()))
}

unsafe fn write_string(out: *mut *mut c_char, text: String) -> Result<(), (OcStatus, String)> {
    let c = CString::new(text).map_err(|_| (OcStatus::Internal, "output contains NUL".to_string()))?;
    *out = c.into_raw();
    Ok(())
}

fn check_out<T>(out: *mut T) -> Result<(), (OcStatus, String)> {
    if out.is_null() {
        Err((OcStatus::NullPointer, "output pointer is null".into()))
    } else {
        Ok(())
    }
}

/// Loads an engine from a TOML config file.
///
/// # Safety
/// `config_path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oc_engine_open(config_path: *const c_char, out: *mut *mut OcEngine) -> OcStatus {
    guard(|| {
        check_out(out)?;
        *out = ptr::null_mut();
        let path = read_str(config_path, "config_path")?;
        let inner = Engine::load(Path::new(path)).map_err(engine_err)?;
        *out = Box::into_raw(Box::new(OcEngine { inner }));
        Ok(())
    })
}

/// Releases an engine. Null is ignored.
///
/// # Safety
/// `engine` must come from [`oc_engine_open`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn oc_engine_free(engine: *mut OcEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Builds and stores profiles for every outlet; writes the run report.
///
/// # Safety
/// `engine` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oc_profile_all_json(engine: *const OcEngine, out_json: *mut *mut c_char) -> OcStatus {
    guard(|| {
        check_out(out_json)?;
        let engine = engine_ref(engine)?;
        let report = engine.profile_all().map_err(engine_err)?;
        write_string(out_json, canonical::to_string(&report).map_err(engine_err)?)
    })
}

/// Writes the claim verdict as JSON.
///
/// # Safety
/// `engine` must be a live handle; `claim` NUL-terminated; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn oc_score_claim_json(
    engine: *const OcEngine,
    claim: *const c_char,
    out_json: *mut *mut c_char,
) -> OcStatus {
    guard(|| {
        check_out(out_json)?;
        let engine = engine_ref(engine)?;
        let claim = read_str(claim, "claim")?;
        let verdict = engine.score_claim(claim).map_err(engine_err)?;
        write_string(out_json, canonical::to_string(&verdict).map_err(engine_err)?)
    })
}

/// Writes the stored profile of `domain` as JSON.
///
/// # Safety
/// `engine` must be a live handle; `domain` NUL-terminated; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn oc_profile_json(
    engine: *const OcEngine,
    domain: *const c_char,
    out_json: *mut *mut c_char,
) -> OcStatus {
    guard(|| {
        check_out(out_json)?;
        let engine = engine_ref(engine)?;
        let domain = outletcheck::ingest::normalize_domain(read_str(domain, "domain")?).map_err(engine_err)?;
        let profile = engine
            .profile(&domain)
            .ok_or_else(|| engine_err(Error::MissingProfile(domain)))?;
        write_string(out_json, canonical::to_string(&profile).map_err(engine_err)?)
    })
}

/// Writes the score of a corpus article as JSON.
///
/// # Safety
/// `engine` must be a live handle; `article_id` NUL-terminated; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn oc_score_article_json(
    engine: *const OcEngine,
    article_id: *const c_char,
    out_json: *mut *mut c_char,
) -> OcStatus {
    guard(|| {
        check_out(out_json)?;
        let engine = engine_ref(engine)?;
        let id = read_str(article_id, "article_id")?;
        let score = engine.score_article_by_id(id).map_err(engine_err)?;
        write_string(out_json, canonical::to_string(&score).map_err(engine_err)?)
    })
}

/// `lambda * r_lang + (1 - lambda) * r_site`, clamped to [0,1].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oc_article_factuality(r_lang: f64, r_site: f64, lambda: f64, out: *mut f64) -> OcStatus {
    guard(|| {
        check_out(out)?;
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !(unit(r_lang) && unit(r_site) && unit(lambda)) {
            return Err((OcStatus::InvalidArgument, "inputs must lie in [0,1]".into()));
        }
        *out = article_factuality(r_lang, r_site, lambda);
        Ok(())
    })
}

/// Σ reliability·stance over `n` pairs. Stances must be -1, 0 or 1.
///
/// # Safety
/// Both arrays must hold `n` values (they may be null when `n` is 0);
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oc_claim_raw_score(
    reliabilities: *const f64,
    stances: *const f64,
    n: usize,
    out: *mut f64,
) -> OcStatus {
    guard(|| {
        check_out(out)?;
        if n > 0 && (reliabilities.is_null() || stances.is_null()) {
            return Err((OcStatus::NullPointer, "input array is null".into()));
        }
        let mut evidence = Vec::with_capacity(n);
        for i in 0..n {
            let r = *reliabilities.add(i);
            let s = *stances.add(i);
            let label = match s {
                1.0 => StanceLabel::Agree,
                -1.0 => StanceLabel::Disagree,
                0.0 => StanceLabel::Discuss,
                _ => return Err((OcStatus::InvalidArgument, format!("stance {s} at {i} is not -1, 0 or 1"))),
            };
            if !(0.0..=1.0).contains(&r) {
                return Err((OcStatus::InvalidArgument, format!("reliability {r} at {i} is outside [0,1]")));
            }
            evidence.push(EvidenceItem::new(i.to_string(), "", r, label, s, 0.0));
        }
        *out = claim_raw_score(&evidence);
        Ok(())
    })
}

/// Canonical domain of a URL or host.
///
/// # Safety
/// `url` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oc_normalize_domain(url: *const c_char, out: *mut *mut c_char) -> OcStatus {
    guard(|| {
        check_out(out)?;
        let url = read_str(url, "url")?;
        let domain = outletcheck::ingest::normalize_domain(url).map_err(engine_err)?;
        write_string(out, domain)
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn oc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failure on this thread, or null. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn oc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version, statically allocated.
#[no_mangle]
pub extern "C" fn oc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
