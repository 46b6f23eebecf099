//! C ABI over the factsim toolkit.
//!
//! Objects cross the boundary as opaque handles that the caller frees with
//! the matching `*_free` function. Every fallible function returns a
//! [`FactsimStatus`]; on failure the message is available from
//! [`factsim_last_error`] on the same thread until the next failing call.
//! Strings returned through `char **` outputs are owned by the caller and
//! released with [`factsim_string_free`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::c_char;

use factsim::benchmark::{kendall_tau_variant, TauVariant};
use factsim::embedding::{clamped_cosine, Encoder, RemoteEncoder, TestEncoder};
use factsim::explain::{export_matrix, ExportFormat};
use factsim::extraction::{parse_tuple_list, FactSet, FactTuple};
use factsim::rouge::rouge_all;
use factsim::scoring::{score, ScoreReport};
use factsim::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactsimStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    Provider = 4,
    Parse = 5,
    EmptyExtraction = 6,
    Io = 7,
    /// A Rust panic was caught at the boundary.
    Internal = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactsimTau {
    A = 0,
    B = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FactsimRouge {
    pub r1: f64,
    pub r2: f64,
    pub rl: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FactsimScores {
    pub coverage: f64,
    pub consistency: f64,
    pub factsim: f64,
}

/// Opaque set of fact tuples with provenance.
pub struct FactsimFactSet(FactSet);

/// Opaque sentence encoder.
pub struct FactsimEncoder(Box<dyn Encoder>);

/// Opaque score report.
pub struct FactsimReport(ScoreReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes were replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(FactsimStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e.root() {
            Error::InvalidInput(_)
            | Error::InvalidVector(_)
            | Error::Schema { .. }
            | Error::Json(_) => FactsimStatus::InvalidInput,
            Error::Provider { .. } | Error::CacheMiss { .. } => FactsimStatus::Provider,
            Error::Parse { .. } => FactsimStatus::Parse,
            Error::EmptyExtraction(_) => FactsimStatus::EmptyExtraction,
            _ => FactsimStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn null(name: &str) -> Failure {
    Failure(FactsimStatus::NullArgument, format!("{name} is null"))
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FactsimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FactsimStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal error: {message}"));
            FactsimStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(FactsimStatus::InvalidUtf8, format!("{name}: {e}")))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(name))
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|e| Failure(FactsimStatus::Internal, e.to_string()))
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn factsim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn factsim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn factsim_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// ROUGE-1/2/L F1 of `candidate` against `reference`.
///
/// # Safety
/// String arguments must be valid NUL-terminated strings; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn factsim_rouge(
    reference: *const c_char,
    candidate: *const c_char,
    out: *mut FactsimRouge,
) -> FactsimStatus {
    guard(|| {
        let s = rouge_all(
            str_arg(reference, "reference")?,
            str_arg(candidate, "candidate")?,
        );
        *out_arg(out, "out")? = FactsimRouge {
            r1: s.r1,
            r2: s.r2,
            rl: s.rl,
        };
        Ok(())
    })
}

/// Kendall's tau between two arrays of `len` values.
///
/// # Safety
/// `x` and `y` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn factsim_kendall_tau(
    x: *const f64,
    y: *const f64,
    len: usize,
    variant: FactsimTau,
    out: *mut f64,
) -> FactsimStatus {
    guard(|| {
        let variant = match variant {
            FactsimTau::A => TauVariant::A,
            FactsimTau::B => TauVariant::B,
        };
        let t = kendall_tau_variant(slice_arg(x, len, "x")?, slice_arg(y, len, "y")?, variant)?;
        *out_arg(out, "out")? = t;
        Ok(())
    })
}

/// Cosine similarity with negative values mapped to 0.
///
/// # Safety
/// `a` and `b` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn factsim_clamped_cosine(
    a: *const f64,
    b: *const f64,
    len: usize,
    out: *mut f64,
) -> FactsimStatus {
    guard(|| {
        *out_arg(out, "out")? = clamped_cosine(slice_arg(a, len, "a")?, slice_arg(b, len, "b")?)?;
        Ok(())
    })
}

/// Creates an empty fact set over `documents` source documents.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn factsim_factset_new(
    documents: usize,
    out: *mut *mut FactsimFactSet,
) -> FactsimStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(FactsimFactSet(FactSet::new(documents))));
        Ok(())
    })
}

/// Parses a model completion into a fact set with a single source document.
///
/// # Safety
/// `raw` must be a valid NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn factsim_parse_tuples(
    raw: *const c_char,
    out: *mut *mut FactsimFactSet,
) -> FactsimStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let parsed = parse_tuple_list(str_arg(raw, "raw")?)?;
        *out = Box::into_raw(Box::new(FactsimFactSet(FactSet::from_tuples(
            parsed.tuples,
        ))));
        Ok(())
    })
}

/// Reads a fact set from its JSON form.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn factsim_factset_from_json(
    json: *const c_char,
    out: *mut *mut FactsimFactSet,
) -> FactsimStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let set: FactSet = serde_json::from_str(str_arg(json, "json")?).map_err(Error::from)?;
        *out = Box::into_raw(Box::new(FactsimFactSet(set)));
        Ok(())
    })
}

/// Appends a tuple from document `source`.
///
/// # Safety
/// `set` must be a live handle; strings must be valid NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn factsim_factset_push(
    set: *mut FactsimFactSet,
    subject: *const c_char,
    description: *const c_char,
    source: usize,
) -> FactsimStatus {
    guard(|| {
        let set = set.as_mut().ok_or_else(|| null("set"))?;
        let tuple = FactTuple::new(
            str_arg(subject, "subject")?,
            str_arg(description, "description")?,
        )?;
        set.0.push(tuple, source)?;
        Ok(())
    })
}

/// Number of tuples, or 0 for NULL.
///
/// # Safety
/// `set` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn factsim_factset_len(set: *const FactsimFactSet) -> usize {
    set.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `set` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn factsim_factset_to_json(
    set: *const FactsimFactSet,
    out: *mut *mut c_char,
) -> FactsimStatus {
    guard(|| {
        let set = handle(set, "set")?;
        let out = out_arg(out, "out")?;
        *out = into_c_string(set.0.to_json_value().to_string())?;
        Ok(())
    })
}

/// # Safety
/// `set` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn factsim_factset_free(set: *mut FactsimFactSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// The deterministic offline trigram encoder.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn factsim_encoder_test(out: *mut *mut FactsimEncoder) -> FactsimStatus {
    guard(|| {
        *out_arg(out, "out")? = Box::into_raw(Box::new(FactsimEncoder(Box::new(TestEncoder))));
        Ok(())
    })
}

/// An OpenAI-compatible embeddings endpoint. `api_key` may be NULL.
///
/// # Safety
/// String arguments must be NULL (where allowed) or valid NUL-terminated
/// strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn factsim_encoder_remote(
    base_url: *const c_char,
    api_key: *const c_char,
    model: *const c_char,
    out: *mut *mut FactsimEncoder,
) -> FactsimStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let key = if api_key.is_null() {
            None
        } else {
            Some(str_arg(api_key, "api_key")?.to_string())
        };
        let encoder = RemoteEncoder::new(
            str_arg(base_url, "base_url")?,
            key,
            str_arg(model, "model")?,
        );
        *out = Box::into_raw(Box::new(FactsimEncoder(Box::new(encoder))));
        Ok(())
    })
}

/// # Safety
/// `encoder` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn factsim_encoder_free(encoder: *mut FactsimEncoder) {
    if !encoder.is_null() {
        drop(Box::from_raw(encoder));
    }
}

/// Embeds both sets and scores the summary against the reviews.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn factsim_score(
    encoder: *const FactsimEncoder,
    reviews: *const FactsimFactSet,
    summary: *const FactsimFactSet,
    out: *mut *mut FactsimReport,
) -> FactsimStatus {
    guard(|| {
        let encoder = handle(encoder, "encoder")?;
        let reviews = handle(reviews, "reviews")?;
        let summary = handle(summary, "summary")?;
        let out = out_arg(out, "out")?;
        let report = score(&reviews.0, &summary.0, &encoder.0)?;
        *out = Box::into_raw(Box::new(FactsimReport(report)));
        Ok(())
    })
}

/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn factsim_report_scores(
    report: *const FactsimReport,
    out: *mut FactsimScores,
) -> FactsimStatus {
    guard(|| {
        let r = &handle(report, "report")?.0;
        *out_arg(out, "out")? = FactsimScores {
            coverage: r.coverage,
            consistency: r.consistency,
            factsim: r.factsim,
        };
        Ok(())
    })
}

/// Full report as JSON.
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn factsim_report_to_json(
    report: *const FactsimReport,
    out: *mut *mut c_char,
) -> FactsimStatus {
    guard(|| {
        let r = &handle(report, "report")?.0;
        let out = out_arg(out, "out")?;
        *out = into_c_string(serde_json::to_string(r).map_err(Error::from)?)?;
        Ok(())
    })
}

/// Labeled similarity matrix as CSV.
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn factsim_report_matrix_csv(
    report: *const FactsimReport,
    out: *mut *mut c_char,
) -> FactsimStatus {
    guard(|| {
        let r = &handle(report, "report")?.0;
        let out = out_arg(out, "out")?;
        let bytes = export_matrix(r, ExportFormat::Csv)?;
        let text = String::from_utf8(bytes)
            .map_err(|e| Failure(FactsimStatus::Internal, e.to_string()))?;
        *out = into_c_string(text)?;
        Ok(())
    })
}

/// # Safety
/// `report` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn factsim_report_free(report: *mut FactsimReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
