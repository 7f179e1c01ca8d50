//! C ABI over the lyrix toolkit.
//!
//! Every fallible call returns a `LyrixStatus` and writes its result
//! through an out-pointer. On failure the message is kept per thread and
//! read with `lyrix_last_error_message`. Objects cross the boundary as
//! opaque handles that the caller releases with the matching `_free`
//! function; strings returned by the library are released with
//! `lyrix_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use lyrix::lexical::windowed_ttr;
use lyrix::phonetics::{syllable_count, DictSource, Dictionaries, PronouncingDictionary};
use lyrix::rhyme::{detect_rhymes, RhymeAnalysis, RhymeConfig};
use lyrix::semantics::topic_entropy;
use lyrix::trends::{bocpd, BocpdConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LyrixStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    InvalidArgument = 5,
    Precondition = 6,
    OutOfRange = 7,
    Panic = 8,
}

/// Slang and base pronouncing dictionaries.
pub struct LyrixDictionaries(Dictionaries);

/// Result of one rhyme detection call.
pub struct LyrixRhymeAnalysis(RhymeAnalysis);

/// One detected rhyme. Line indices are 0-based; internal rhymes have
/// `line_i == line_j`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyrixRhymePair {
    pub line_i: usize,
    pub line_j: usize,
    pub score: f64,
    pub span: usize,
    pub end_rhyme: bool,
    pub internal: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(LyrixStatus, String);

impl From<lyrix::Error> for Failure {
    fn from(e: lyrix::Error) -> Self {
        use lyrix::Error as E;
        let status = match &e {
            E::Io { .. } | E::MissingPath { .. } => LyrixStatus::Io,
            E::Parse { .. } | E::Config(_) | E::Json(_) | E::Csv(_) => LyrixStatus::Parse,
            E::Parameter(_) | E::UnknownFeature { .. } => LyrixStatus::InvalidArgument,
            _ => LyrixStatus::Precondition,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

/// Runs `f`, turning errors and panics into a status code plus message.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> LyrixStatus {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LyrixStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            LyrixStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(LyrixStatus::NullPointer, format!("`{what}` is null"))
}

/// Borrows a C string. Caller guarantees a valid nul-terminated buffer.
unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(LyrixStatus::InvalidUtf8, format!("`{what}` is not valid UTF-8")))
}

unsafe fn optional_text<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p, what).map(Some)
    }
}

unsafe fn string_array(p: *const *const c_char, n: usize, what: &str) -> Result<Vec<String>, Failure> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if p.is_null() {
        return Err(null(what));
    }
    std::slice::from_raw_parts(p, n)
        .iter()
        .enumerate()
        .map(|(i, s)| text(*s, &format!("{what}[{i}]")).map(str::to_string))
        .collect()
}

unsafe fn f64_array<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Failure> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn toml_config<T: serde::de::DeserializeOwned + Default>(src: Option<&str>) -> Result<T, Failure> {
    match src {
        None => Ok(T::default()),
        Some(s) => toml::from_str(s).map_err(|e| Failure(LyrixStatus::Parse, format!("config: {e}"))),
    }
}

fn json_string<T: serde::Serialize>(value: &T) -> Result<*mut c_char, Failure> {
    let s = serde_json::to_string(value).map_err(|e| Failure(LyrixStatus::Parse, e.to_string()))?;
    Ok(CString::new(s).expect("JSON has no interior nul").into_raw())
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn lyrix_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn lyrix_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn lyrix_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads the base dictionary and, when `slang_path` is non-null, the slang
/// dictionary layered over it. Malformed lines are skipped.
///
/// # Safety
/// Paths must be valid C strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lyrix_dictionaries_load(
    base_path: *const c_char,
    slang_path: *const c_char,
    out: *mut *mut LyrixDictionaries,
) -> LyrixStatus {
    guard(|| {
        let base_path = text(base_path, "base_path")?;
        let slang_path = optional_text(slang_path, "slang_path")?;
        let (base, _) = PronouncingDictionary::parse_file(Path::new(base_path), DictSource::Base)?;
        let slang = match slang_path {
            Some(p) => PronouncingDictionary::parse_file(Path::new(p), DictSource::Slang)?.0,
            None => PronouncingDictionary::empty(DictSource::Slang),
        };
        let handle = Box::into_raw(Box::new(LyrixDictionaries(Dictionaries::new(slang, base))));
        write(out, handle, "out").inspect_err(|_| drop(Box::from_raw(handle)))
    })
}

/// # Safety
/// `dicts` must come from `lyrix_dictionaries_load` and not be freed yet.
#[no_mangle]
pub unsafe extern "C" fn lyrix_dictionaries_free(dicts: *mut LyrixDictionaries) {
    if !dicts.is_null() {
        drop(Box::from_raw(dicts));
    }
}

/// Syllables of one lowercase token via slang, base, then the estimator.
///
/// # Safety
/// `dicts` must be a live handle, `token` a valid C string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lyrix_syllable_count(
    dicts: *const LyrixDictionaries,
    token: *const c_char,
    out: *mut usize,
) -> LyrixStatus {
    guard(|| {
        let dicts = dicts.as_ref().ok_or_else(|| null("dicts"))?;
        let token = text(token, "token")?;
        write(out, syllable_count(&dicts.0.lookup(token)), "out")
    })
}

/// Detects rhymes over `n_lines` cleaned lines. `config_toml` may be null
/// for the defaults or hold `[rhyme]`-section keys (threshold, window,
/// max_span, equivalence_classes, final_consonant_deletion).
///
/// # Safety
/// `dicts` must be a live handle; `lines` must point to `n_lines` valid C
/// strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lyrix_detect_rhymes(
    dicts: *const LyrixDictionaries,
    lines: *const *const c_char,
    n_lines: usize,
    config_toml: *const c_char,
    out: *mut *mut LyrixRhymeAnalysis,
) -> LyrixStatus {
    guard(|| {
        let dicts = dicts.as_ref().ok_or_else(|| null("dicts"))?;
        let lines = string_array(lines, n_lines, "lines")?;
        let cfg: RhymeConfig = toml_config(optional_text(config_toml, "config_toml")?)?;
        let analysis = detect_rhymes(&lines, &dicts.0, &cfg)?;
        let handle = Box::into_raw(Box::new(LyrixRhymeAnalysis(analysis)));
        write(out, handle, "out").inspect_err(|_| drop(Box::from_raw(handle)))
    })
}

/// # Safety
/// `analysis` must come from `lyrix_detect_rhymes` and not be freed yet.
#[no_mangle]
pub unsafe extern "C" fn lyrix_rhyme_analysis_free(analysis: *mut LyrixRhymeAnalysis) {
    if !analysis.is_null() {
        drop(Box::from_raw(analysis));
    }
}

/// Number of pairs, cross-line and internal. Zero for a null handle.
///
/// # Safety
/// `analysis` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn lyrix_rhyme_pair_count(analysis: *const LyrixRhymeAnalysis) -> usize {
    analysis.as_ref().map_or(0, |a| a.0.pairs.len())
}

/// # Safety
/// `analysis` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lyrix_rhyme_pair(
    analysis: *const LyrixRhymeAnalysis,
    index: usize,
    out: *mut LyrixRhymePair,
) -> LyrixStatus {
    guard(|| {
        let a = analysis.as_ref().ok_or_else(|| null("analysis"))?;
        let p = a.0.pairs.get(index).ok_or_else(|| {
            Failure(
                LyrixStatus::OutOfRange,
                format!("pair {index} of {}", a.0.pairs.len()),
            )
        })?;
        let pair = LyrixRhymePair {
            line_i: p.line_i,
            line_j: p.line_j,
            score: p.score,
            span: p.span,
            end_rhyme: p.end_rhyme,
            internal: p.is_internal(),
        };
        write(out, pair, "out")
    })
}

/// Cross-line pairs per line and matched syllables per line.
///
/// # Safety
/// `analysis` must be a live handle; both out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn lyrix_rhyme_density(
    analysis: *const LyrixRhymeAnalysis,
    out_pairs: *mut f64,
    out_syllables: *mut f64,
) -> LyrixStatus {
    guard(|| {
        let a = analysis.as_ref().ok_or_else(|| null("analysis"))?;
        write(out_pairs, a.0.density_pairs, "out_pairs")?;
        write(out_syllables, a.0.density_syllables, "out_syllables")
    })
}

/// Full analysis as JSON; release with `lyrix_string_free`.
///
/// # Safety
/// `analysis` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lyrix_rhyme_analysis_json(
    analysis: *const LyrixRhymeAnalysis,
    out: *mut *mut c_char,
) -> LyrixStatus {
    guard(|| {
        let a = analysis.as_ref().ok_or_else(|| null("analysis"))?;
        let s = json_string(&a.0)?;
        write(out, s, "out").inspect_err(|_| drop(CString::from_raw(s)))
    })
}

/// Mean type-token ratio over `window`-token segments.
///
/// # Safety
/// `tokens` must point to `n_tokens` valid C strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lyrix_windowed_ttr(
    tokens: *const *const c_char,
    n_tokens: usize,
    window: usize,
    out: *mut f64,
) -> LyrixStatus {
    guard(|| {
        let tokens = string_array(tokens, n_tokens, "tokens")?;
        write(out, windowed_ttr(&tokens, window)?, "out")
    })
}

/// Shannon entropy in nats of a probability vector.
///
/// # Safety
/// `dist` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lyrix_topic_entropy(dist: *const f64, n: usize, out: *mut f64) -> LyrixStatus {
    guard(|| {
        let dist = f64_array(dist, n, "dist")?;
        write(out, topic_entropy(dist)?, "out")
    })
}

/// Changepoint detection over a series; the report (detections and
/// per-step probabilities) comes back as JSON. `config_toml` may be null
/// or hold `[bocpd]`-section keys.
///
/// # Safety
/// `series` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lyrix_bocpd_json(
    series: *const f64,
    n: usize,
    config_toml: *const c_char,
    out: *mut *mut c_char,
) -> LyrixStatus {
    guard(|| {
        let series = f64_array(series, n, "series")?;
        let cfg: BocpdConfig = toml_config(optional_text(config_toml, "config_toml")?)?;
        let report = bocpd(series, &cfg)?;
        let s = json_string(&report)?;
        write(out, s, "out").inspect_err(|_| drop(CString::from_raw(s)))
    })
}
