//! C ABI over `signalmarket`.
//!
//! Every fallible function returns an [`SmStatus`] and writes its result
//! through an out pointer. On failure `sm_last_error()` describes the problem
//! until the next failing call on the same thread. Handles are opaque and
//! must be released with the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use signalmarket::econ::{did_itt, DidOptions, Timing};
use signalmarket::model::{self, ModelParams};
use signalmarket::sim::{generate_market, write_bids, Dataset, Scenario, SimConfig};
use signalmarket::text::{tailoring_score, Document, Stopwords, TfidfModel};
use signalmarket::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmStatus {
    Ok = 0,
    /// A required pointer was null or a string was not UTF-8.
    InvalidArgument = 1,
    /// Bad configuration or input data.
    Input = 2,
    /// The computation failed numerically.
    Numerical = 3,
    /// An internal panic was caught at the boundary.
    Internal = 4,
}

/// Model parameters.
pub struct SmParams(ModelParams);

/// TF-IDF model fitted on a corpus, with the bundled English stopwords.
pub struct SmCorpus {
    model: TfidfModel,
    stopwords: Stopwords,
}

/// A generated synthetic market.
pub struct SmDataset {
    data: Dataset,
    timing: Timing,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(SmStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = if e.exit_code() == 3 { SmStatus::Numerical } else { SmStatus::Input };
        Fail(status, e.to_string())
    }
}

fn invalid(msg: &str) -> Fail {
    Fail(SmStatus::InvalidArgument, msg.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SmStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SmStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(invalid(&format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(&format!("{what} is not valid UTF-8")))
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| invalid("output pointer is null"))
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| invalid("handle is null"))
}

/// Message of the last failure on this thread, or null. Owned by the library.
#[no_mangle]
pub extern "C" fn sm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn sm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parameters of the published simulation figures.
///
/// # Safety
/// `out_params` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sm_params_default(out_params: *mut *mut SmParams) -> SmStatus {
    guard(|| {
        *out(out_params)? = Box::into_raw(Box::new(SmParams(ModelParams::figure_note())));
        Ok(())
    })
}

/// Validated parameters.
///
/// # Safety
/// `out_params` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sm_params_new(
    mu0: f64,
    tau2: f64,
    sigma2: f64,
    p: f64,
    a: f64,
    n: usize,
    out_params: *mut *mut SmParams,
) -> SmStatus {
    guard(|| {
        let slot = out(out_params)?;
        let params = ModelParams { mu0, tau2, sigma2, p, a, n };
        params.validate()?;
        *slot = Box::into_raw(Box::new(SmParams(params)));
        Ok(())
    })
}

/// # Safety
/// `params` must come from `sm_params_*` and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sm_params_free(params: *mut SmParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

unsafe fn scalar(params: *const SmParams, h: f64, out_value: *mut f64, f: fn(f64, &ModelParams) -> f64) -> SmStatus {
    guard(|| {
        let p = handle(params)?;
        *out(out_value)? = f(h, &p.0);
        Ok(())
    })
}

/// Posterior probability that a letter of quality `h` was AI-assisted.
///
/// # Safety
/// `params` must be a live handle and `out_value` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sm_access_posterior(params: *const SmParams, h: f64, out_value: *mut f64) -> SmStatus {
    scalar(params, h, out_value, model::access_posterior)
}

/// Expected productivity given letter quality `h`.
///
/// # Safety
/// As [`sm_access_posterior`].
#[no_mangle]
pub unsafe extern "C" fn sm_expected_productivity(params: *const SmParams, h: f64, out_value: *mut f64) -> SmStatus {
    scalar(params, h, out_value, model::expected_productivity)
}

/// Derivative of expected productivity in `h`.
///
/// # Safety
/// As [`sm_access_posterior`].
#[no_mangle]
pub unsafe extern "C" fn sm_expected_productivity_slope(
    params: *const SmParams,
    h: f64,
    out_value: *mut f64,
) -> SmStatus {
    scalar(params, h, out_value, model::expected_productivity_slope)
}

/// Hiring probability against the outside option alone.
///
/// # Safety
/// As [`sm_access_posterior`].
#[no_mangle]
pub unsafe extern "C" fn sm_hire_prob_binary(params: *const SmParams, h: f64, out_value: *mut f64) -> SmStatus {
    scalar(params, h, out_value, model::hire_prob_binary)
}

/// Multinomial hiring probabilities of `len` applicants; `len` must equal the
/// parameters' applicant count. Writes `len` values to `out_probs`.
///
/// # Safety
/// `h` and `out_probs` must point to `len` readable / writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sm_hire_prob_conditional(
    params: *const SmParams,
    h: *const f64,
    len: usize,
    out_probs: *mut f64,
) -> SmStatus {
    guard(|| {
        let p = handle(params)?;
        if h.is_null() || out_probs.is_null() {
            return Err(invalid("array pointer is null"));
        }
        let hs = std::slice::from_raw_parts(h, len);
        let probs = model::hire_prob_conditional(hs, &p.0)?;
        std::slice::from_raw_parts_mut(out_probs, len).copy_from_slice(&probs);
        Ok(())
    })
}

/// Fits TF-IDF on `len` documents (job posts and letters together).
///
/// # Safety
/// `texts` must point to `len` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn sm_corpus_new(
    texts: *const *const c_char,
    len: usize,
    out_corpus: *mut *mut SmCorpus,
) -> SmStatus {
    guard(|| {
        let slot = out(out_corpus)?;
        if texts.is_null() {
            return Err(invalid("texts is null"));
        }
        let stopwords = Stopwords::english();
        let docs = std::slice::from_raw_parts(texts, len)
            .iter()
            .enumerate()
            .map(|(i, &t)| Ok(Document::new(i.to_string(), str_arg(t, "text")?, &stopwords)))
            .collect::<Result<Vec<_>, Fail>>()?;
        let model = TfidfModel::fit(&docs)?;
        *slot = Box::into_raw(Box::new(SmCorpus { model, stopwords }));
        Ok(())
    })
}

/// Tailoring score of a letter against a job post, in [0, 1].
///
/// # Safety
/// `corpus` must be live; the strings NUL-terminated; `out_score` writable.
#[no_mangle]
pub unsafe extern "C" fn sm_corpus_tailoring(
    corpus: *const SmCorpus,
    job_text: *const c_char,
    letter_text: *const c_char,
    out_score: *mut f64,
) -> SmStatus {
    guard(|| {
        let c = handle(corpus)?;
        let job = str_arg(job_text, "job_text")?;
        let letter = str_arg(letter_text, "letter_text")?;
        *out(out_score)? = tailoring_score(&c.model, job, letter, &c.stopwords);
        Ok(())
    })
}

/// # Safety
/// `corpus` must come from `sm_corpus_new` and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sm_corpus_free(corpus: *mut SmCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// Generates a market from a named scenario (`default`, `null`,
/// `belief-switch`, ...). Zero sizes keep the scenario defaults.
///
/// # Safety
/// `scenario` must be NUL-terminated; `out_dataset` writable.
#[no_mangle]
pub unsafe extern "C" fn sm_dataset_generate(
    scenario: *const c_char,
    seed: u64,
    n_workers: usize,
    n_jobs: usize,
    out_dataset: *mut *mut SmDataset,
) -> SmStatus {
    guard(|| {
        let slot = out(out_dataset)?;
        let sc: Scenario = str_arg(scenario, "scenario")?.parse()?;
        let mut cfg = SimConfig::default().apply(sc);
        cfg.seed = seed;
        if n_workers > 0 {
            cfg.n_workers = n_workers;
        }
        if n_jobs > 0 {
            cfg.n_jobs = n_jobs;
        }
        let data = generate_market(&cfg)?;
        let timing = Timing { gpt_period: cfg.gpt_period, tool_period: cfg.tool_period };
        *slot = Box::into_raw(Box::new(SmDataset { data, timing }));
        Ok(())
    })
}

/// Number of bids in the dataset; 0 for a null handle.
///
/// # Safety
/// `dataset` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn sm_dataset_n_bids(dataset: *const SmDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.data.bids.len())
}

/// Writes the bids as CSV to `path`.
///
/// # Safety
/// `dataset` must be live; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn sm_dataset_write_bids(dataset: *const SmDataset, path: *const c_char) -> SmStatus {
    guard(|| {
        let d = handle(dataset)?;
        let path = Path::new(str_arg(path, "path")?);
        let file = std::fs::File::create(path).map_err(Error::from)?;
        write_bids(&d.data.bids, std::io::BufWriter::new(file))?;
        Ok(())
    })
}

/// Intention-to-treat estimate on tailoring with the default controls and
/// worker clustering.
///
/// # Safety
/// `dataset` must be live; `out_coef` and `out_se` writable.
#[no_mangle]
pub unsafe extern "C" fn sm_dataset_itt(dataset: *const SmDataset, out_coef: *mut f64, out_se: *mut f64) -> SmStatus {
    guard(|| {
        let d = handle(dataset)?;
        let coef = out(out_coef)?;
        let se = out(out_se)?;
        let r = did_itt(&d.data.bids, &d.timing, &DidOptions::default())?;
        *coef = r.coef["post_ai*access"];
        *se = r.se["post_ai*access"];
        Ok(())
    })
}

/// # Safety
/// `dataset` must come from `sm_dataset_generate` and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sm_dataset_free(dataset: *mut SmDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}
