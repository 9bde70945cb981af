//! C ABI over the `kgrec` recommender.
//!
//! Every fallible function returns a [`KgrecStatus`]; on failure a description is available
//! from [`kgrec_last_error_message`] on the same thread. Strings returned through `out`
//! parameters are owned by the caller and released with [`kgrec_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use kgrec::eval;
use kgrec::pipeline::Engine;
use kgrec::recommender::{weighted_similarity, FeatureWeights, NUM_FEATURES};
use kgrec::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KgrecStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    NotFound = 3,
    InvalidArgument = 4,
    MissingArtifact = 5,
    Io = 6,
    Parse = 7,
    Internal = 8,
}

/// Loaded fused records plus feature vectors for every movie.
pub struct KgrecEngine {
    inner: Engine,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(KgrecStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::UnknownMovie(_)
            | Error::MovieNotInGraph(_)
            | Error::UnknownEntity(_)
            | Error::UnknownRelation(_)
            | Error::EntityNotEmbedded(_) => KgrecStatus::NotFound,
            Error::MissingArtifacts(_) => KgrecStatus::MissingArtifact,
            Error::Io { .. } => KgrecStatus::Io,
            Error::Json { .. } | Error::Record { .. } => KgrecStatus::Parse,
            _ => KgrecStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn fail(status: KgrecStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

/// Runs `f`, recording any error or panic; clears the last error on success.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> KgrecStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            KgrecStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            KgrecStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(KgrecStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(KgrecStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn engine_arg<'a>(p: *const KgrecEngine) -> Result<&'a Engine, Failure> {
    p.as_ref()
        .map(|e| &e.inner)
        .ok_or_else(|| fail(KgrecStatus::NullPointer, "engine is null"))
}

unsafe fn weights_arg(p: *const f64) -> Result<FeatureWeights, Failure> {
    if p.is_null() {
        return Ok(FeatureWeights::uniform());
    }
    let mut w = [0.0; NUM_FEATURES];
    w.copy_from_slice(std::slice::from_raw_parts(p, NUM_FEATURES));
    Ok(FeatureWeights::new(w)?)
}

fn null_check<T>(p: *mut T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(fail(KgrecStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

/// Message for the last failed call on this thread, or null. Valid until the next call.
#[no_mangle]
pub extern "C" fn kgrec_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn kgrec_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Edit distance between two UTF-8 strings, counted in characters.
///
/// # Safety
/// `a` and `b` must be null or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kgrec_levenshtein(a: *const c_char, b: *const c_char, out: *mut usize) -> KgrecStatus {
    guard(|| {
        null_check(out, "out")?;
        let (a, b) = (str_arg(a, "a")?, str_arg(b, "b")?);
        *out = kgrec::corpus::levenshtein(a, b);
        Ok(())
    })
}

/// Opens the artifacts written by the pipeline stages in `work_dir`.
///
/// # Safety
/// `work_dir` must be NUL-terminated; `out` must be writable. Free the handle with
/// [`kgrec_engine_free`].
#[no_mangle]
pub unsafe extern "C" fn kgrec_engine_open(work_dir: *const c_char, out: *mut *mut KgrecEngine) -> KgrecStatus {
    guard(|| {
        null_check(out, "out")?;
        let dir = str_arg(work_dir, "work_dir")?;
        let inner = Engine::open(Path::new(dir))?;
        *out = Box::into_raw(Box::new(KgrecEngine { inner }));
        Ok(())
    })
}

/// # Safety
/// `engine` must be null or a handle from [`kgrec_engine_open`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kgrec_engine_free(engine: *mut KgrecEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// # Safety
/// `engine` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kgrec_engine_movie_count(engine: *const KgrecEngine, out: *mut usize) -> KgrecStatus {
    guard(|| {
        null_check(out, "out")?;
        *out = engine_arg(engine)?.index.len();
        Ok(())
    })
}

/// Top-`k` recommendations for `movie` as a JSON array of `{"movie", "score"}` objects.
/// `weights` points at five feature weights (text, director, producer, actors, genre),
/// or is null for equal weights.
///
/// # Safety
/// `engine` must be a live handle, `movie` NUL-terminated, `weights` null or five readable
/// doubles, `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn kgrec_engine_recommend_json(
    engine: *const KgrecEngine,
    movie: *const c_char,
    k: usize,
    weights: *const f64,
    out_json: *mut *mut c_char,
) -> KgrecStatus {
    guard(|| {
        null_check(out_json, "out_json")?;
        let engine = engine_arg(engine)?;
        let movie = str_arg(movie, "movie")?;
        let w = weights_arg(weights)?;
        let list = engine.recommend(movie, k, &w)?;
        let json = serde_json::to_string(&list.recommendations)
            .map_err(|e| fail(KgrecStatus::Internal, e.to_string()))?;
        *out_json = CString::new(json).expect("JSON has no NUL").into_raw();
        Ok(())
    })
}

/// Weighted similarity of two movies in the engine.
///
/// # Safety
/// As for [`kgrec_engine_recommend_json`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kgrec_engine_similarity(
    engine: *const KgrecEngine,
    a: *const c_char,
    b: *const c_char,
    weights: *const f64,
    out: *mut f64,
) -> KgrecStatus {
    guard(|| {
        null_check(out, "out")?;
        let engine = engine_arg(engine)?;
        let w = weights_arg(weights)?;
        let lookup = |id: &str| {
            engine
                .index
                .get(id)
                .ok_or_else(|| Failure::from(Error::UnknownMovie(id.to_string())))
        };
        let a = lookup(str_arg(a, "a")?)?;
        let b = lookup(str_arg(b, "b")?)?;
        *out = weighted_similarity(a, b, &w)?.score;
        Ok(())
    })
}

/// Harmonic mean of precision and recall; 0 when both are 0.
#[no_mangle]
pub extern "C" fn kgrec_f1(precision: f64, recall: f64) -> f64 {
    eval::f1(precision, recall)
}

/// Percentage of the catalogue that was ever recommended.
#[no_mangle]
pub extern "C" fn kgrec_coverage(recommended_ever: usize, catalog_size: usize) -> f64 {
    eval::coverage(recommended_ever, catalog_size)
}
