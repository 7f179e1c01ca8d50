use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::ptr;

use lyrix_ffi::*;

fn data(name: &str) -> CString {
    let p: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(name);
    CString::new(p.to_str().unwrap()).unwrap()
}

fn load() -> *mut LyrixDictionaries {
    let mut d = ptr::null_mut();
    let base = data("cmudict_subset.dict");
    let slang = data("slang_pronunciations.dict");
    assert_eq!(unsafe { lyrix_dictionaries_load(base.as_ptr(), slang.as_ptr(), &mut d) }, LyrixStatus::Ok);
    assert!(!d.is_null());
    d
}

fn c_lines(v: &[&str]) -> (Vec<CString>, Vec<*const c_char>) {
    let owned: Vec<CString> = v.iter().map(|s| CString::new(*s).unwrap()).collect();
    let ptrs = owned.iter().map(|s| s.as_ptr()).collect();
    (owned, ptrs)
}

#[test]
fn syllables_through_the_cascade() {
    let d = load();
    let mut n = 0usize;
    for (word, expected) in [("cat", 1), ("elevator", 4), ("shawty", 2)] {
        let w = CString::new(word).unwrap();
        assert_eq!(unsafe { lyrix_syllable_count(d, w.as_ptr(), &mut n) }, LyrixStatus::Ok);
        assert_eq!(n, expected, "{word}");
    }
    unsafe { lyrix_dictionaries_free(d) };
}

#[test]
fn rhyme_handle_round_trip() {
    let d = load();
    let (_keep, ptrs) = c_lines(&["i saw the cat", "she wore a hat"]);
    let mut a = ptr::null_mut();
    assert_eq!(
        unsafe { lyrix_detect_rhymes(d, ptrs.as_ptr(), ptrs.len(), ptr::null(), &mut a) },
        LyrixStatus::Ok
    );
    let n = unsafe { lyrix_rhyme_pair_count(a) };
    assert!(n >= 1);
    let mut found = false;
    for i in 0..n {
        let mut p = LyrixRhymePair {
            line_i: 0,
            line_j: 0,
            score: 0.0,
            span: 0,
            end_rhyme: false,
            internal: false,
        };
        assert_eq!(unsafe { lyrix_rhyme_pair(a, i, &mut p) }, LyrixStatus::Ok);
        if p.line_i == 1 && p.line_j == 0 {
            found = true;
            assert!(p.end_rhyme && !p.internal && p.score > 0.7);
        }
    }
    assert!(found);
    let mut p = std::mem::MaybeUninit::<LyrixRhymePair>::uninit();
    assert_eq!(unsafe { lyrix_rhyme_pair(a, n, p.as_mut_ptr()) }, LyrixStatus::OutOfRange);

    let (mut dp, mut ds) = (0.0, 0.0);
    assert_eq!(unsafe { lyrix_rhyme_density(a, &mut dp, &mut ds) }, LyrixStatus::Ok);
    assert_eq!(dp, 0.5);

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { lyrix_rhyme_analysis_json(a, &mut json) }, LyrixStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_string();
    unsafe { lyrix_string_free(json) };
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["line_count"], 2);

    unsafe {
        lyrix_rhyme_analysis_free(a);
        lyrix_dictionaries_free(d);
    }
}

#[test]
fn rhyme_config_from_toml() {
    let d = load();
    let (_keep, ptrs) = c_lines(&["i saw the cat", "she wore a hat"]);
    let mut a = ptr::null_mut();
    let strict = CString::new("threshold = 1.0\nwindow = 1").unwrap();
    assert_eq!(
        unsafe { lyrix_detect_rhymes(d, ptrs.as_ptr(), 2, strict.as_ptr(), &mut a) },
        LyrixStatus::Ok
    );
    // score can never exceed a threshold of 1
    assert_eq!(unsafe { lyrix_rhyme_pair_count(a) }, 0);
    unsafe { lyrix_rhyme_analysis_free(a) };

    let bad = CString::new("window = 0").unwrap();
    let mut b = ptr::null_mut();
    assert_eq!(
        unsafe { lyrix_detect_rhymes(d, ptrs.as_ptr(), 2, bad.as_ptr(), &mut b) },
        LyrixStatus::InvalidArgument
    );
    assert!(b.is_null());
    let unknown = CString::new("colour = 1").unwrap();
    assert_eq!(
        unsafe { lyrix_detect_rhymes(d, ptrs.as_ptr(), 2, unknown.as_ptr(), &mut b) },
        LyrixStatus::Parse
    );
    unsafe { lyrix_dictionaries_free(d) };
}

#[test]
fn missing_dictionary_is_io_error() {
    let mut d = ptr::null_mut();
    let base = CString::new("/nonexistent/dict").unwrap();
    assert_eq!(unsafe { lyrix_dictionaries_load(base.as_ptr(), ptr::null(), &mut d) }, LyrixStatus::Io);
    assert!(d.is_null());
    let msg = unsafe { CStr::from_ptr(lyrix_last_error_message()) }.to_str().unwrap();
    assert!(msg.contains("/nonexistent/dict"));
}

#[test]
fn null_handles_are_reported() {
    let w = CString::new("cat").unwrap();
    let mut n = 0usize;
    assert_eq!(unsafe { lyrix_syllable_count(ptr::null(), w.as_ptr(), &mut n) }, LyrixStatus::NullPointer);
    assert_eq!(unsafe { lyrix_rhyme_pair_count(ptr::null()) }, 0);
    unsafe {
        lyrix_dictionaries_free(ptr::null_mut());
        lyrix_rhyme_analysis_free(ptr::null_mut());
        lyrix_string_free(ptr::null_mut());
    }
}

#[test]
fn bocpd_report_json() {
    let mut s = vec![0.0, 0.3, -0.2, 0.1, -0.1, 0.2, -0.3, 0.0, 0.1, -0.1];
    s.extend([5.0, 5.2, 4.9, 5.1, 4.8, 5.0, 5.1, 4.9]);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { lyrix_bocpd_json(s.as_ptr(), s.len(), ptr::null(), &mut out) }, LyrixStatus::Ok);
    let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_string();
    unsafe { lyrix_string_free(out) };
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["detections"][0]["index"], 10);
}
