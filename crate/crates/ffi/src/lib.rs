//! C ABI for the commentrel pipeline.
//!
//! Every fallible function returns a [`CrelStatus`]; on failure the message is
//! available from [`crel_last_error_message`] on the same thread. Pipelines are
//! opaque handles released with [`crel_pipeline_free`]; strings returned by the
//! library are released with [`crel_string_free`]. Panics never cross the
//! boundary.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use commentrel::corpus::{load_csv, write_predictions};
use commentrel::registry::{find_run, list_runs, RegistryEntry};
use commentrel::{
    compute_metrics, ClassifierConfig, ColumnMapping, Corpus, Error, FittedPipeline, Label, LabeledExample, RunConfig,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrelStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    DataError = 4,
    IoError = 5,
    MissingComponent = 6,
    Panic = 7,
}

/// Label encoding used across the ABI.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrelLabel {
    NotUseful = 0,
    Useful = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CrelMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub true_negatives: usize,
}

/// Opaque handle to a fitted pipeline.
pub struct CrelPipeline {
    inner: FittedPipeline,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(msg).ok());
}

struct Failure(CrelStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Io { .. } => CrelStatus::IoError,
            Error::MissingComponent(_) => CrelStatus::MissingComponent,
            Error::InvalidConfig(_) | Error::UnknownRun { .. } => CrelStatus::InvalidArgument,
            _ => CrelStatus::DataError,
        };
        Failure(status, e.to_string())
    }
}

/// Runs `body`, recording any error or panic for `crel_last_error_message`.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> CrelStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => CrelStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            CrelStatus::Panic
        }
    }
}

unsafe fn required_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(CrelStatus::NullArgument, format!("{what} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(CrelStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn optional_str<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        required_str(p, what).map(Some)
    }
}

fn not_null<T>(p: *const T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(CrelStatus::NullArgument, format!("{what} is NULL")))
    } else {
        Ok(())
    }
}

fn label_from_c(v: c_int, index: usize) -> Result<Label, Failure> {
    match v {
        1 => Ok(Label::Useful),
        0 => Ok(Label::NotUseful),
        other => Err(Failure(
            CrelStatus::InvalidArgument,
            format!("label {other} at index {index} is neither 0 nor 1"),
        )),
    }
}

fn label_to_c(l: Label) -> c_int {
    match l {
        Label::Useful => CrelLabel::Useful as c_int,
        Label::NotUseful => CrelLabel::NotUseful as c_int,
    }
}

fn config_for(run_name: Option<&str>) -> Result<RunConfig, Failure> {
    match run_name {
        None => Ok(RunConfig::new(
            "custom",
            commentrel::features::WeightingScheme::TfIdf,
            ClassifierConfig::default_for(commentrel::classifiers::ModelKind::LogReg),
        )),
        Some(name) => match find_run(name)? {
            RegistryEntry::BagOfWords(config) => Ok(config),
            RegistryEntry::Transformer(_) => Err(Failure(
                CrelStatus::InvalidArgument,
                format!("{name} is a transformer run; use the command-line tool"),
            )),
        },
    }
}

fn single_document(comment: &str, code: Option<&str>) -> Result<Corpus, Failure> {
    let example = LabeledExample {
        id: 0,
        comment_text: comment.to_string(),
        code_text: code.unwrap_or_default().to_string(),
        label: None,
    };
    Ok(Corpus::new(vec![example], code.is_some())?)
}

unsafe fn pipeline_ref<'a>(p: *const CrelPipeline) -> Result<&'a FittedPipeline, Failure> {
    not_null(p, "pipeline")?;
    Ok(&(*p).inner)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn crel_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn crel_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Trains a pipeline on a labeled CSV (`comment`, optional `code`, `label`
/// columns). `run_name` selects a bag-of-words registry run; NULL uses TF-IDF
/// with logistic regression.
///
/// # Safety
/// String arguments must be NULL or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn crel_pipeline_train(
    train_csv: *const c_char,
    run_name: *const c_char,
    out: *mut *mut CrelPipeline,
) -> CrelStatus {
    guard(|| {
        not_null(out, "out")?;
        *out = ptr::null_mut();
        let path = required_str(train_csv, "train_csv")?;
        let config = config_for(optional_str(run_name, "run_name")?)?;
        let corpus = load_csv(path, &ColumnMapping::default(), true)?;
        let inner = FittedPipeline::fit(&config, &corpus)?;
        *out = Box::into_raw(Box::new(CrelPipeline { inner }));
        Ok(())
    })
}

/// Loads a pipeline saved by `crel_pipeline_save` or the command-line tool.
///
/// # Safety
/// `path` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn crel_pipeline_load(path: *const c_char, out: *mut *mut CrelPipeline) -> CrelStatus {
    guard(|| {
        not_null(out, "out")?;
        *out = ptr::null_mut();
        let inner = FittedPipeline::load(required_str(path, "path")?)?;
        *out = Box::into_raw(Box::new(CrelPipeline { inner }));
        Ok(())
    })
}

/// # Safety
/// `pipeline` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn crel_pipeline_save(pipeline: *const CrelPipeline, path: *const c_char) -> CrelStatus {
    guard(|| {
        let p = pipeline_ref(pipeline)?;
        p.save(required_str(path, "path")?)?;
        Ok(())
    })
}

/// Classifies one comment. `code` may be NULL for comments-only pipelines.
///
/// # Safety
/// `pipeline` must come from this library; strings must be NULL or
/// NUL-terminated; `out_label` must be writable.
#[no_mangle]
pub unsafe extern "C" fn crel_pipeline_predict(
    pipeline: *const CrelPipeline,
    comment: *const c_char,
    code: *const c_char,
    out_label: *mut c_int,
) -> CrelStatus {
    guard(|| {
        not_null(out_label, "out_label")?;
        let p = pipeline_ref(pipeline)?;
        let doc = single_document(required_str(comment, "comment")?, optional_str(code, "code")?)?;
        *out_label = label_to_c(p.predict(&doc)?[0]);
        Ok(())
    })
}

/// Decision score for one comment; the label is Useful when the score exceeds
/// the model's threshold (0 for linear models, 0.5 for forests).
///
/// # Safety
/// As for `crel_pipeline_predict`.
#[no_mangle]
pub unsafe extern "C" fn crel_pipeline_score(
    pipeline: *const CrelPipeline,
    comment: *const c_char,
    code: *const c_char,
    out_score: *mut f64,
) -> CrelStatus {
    guard(|| {
        not_null(out_score, "out_score")?;
        let p = pipeline_ref(pipeline)?;
        let doc = single_document(required_str(comment, "comment")?, optional_str(code, "code")?)?;
        *out_score = p.decision_scores(&doc)?[0];
        Ok(())
    })
}

/// Labels every row of `test_csv` and writes an `id,predicted_label` file.
///
/// # Safety
/// `pipeline` must come from this library; paths must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn crel_pipeline_predict_csv(
    pipeline: *const CrelPipeline,
    test_csv: *const c_char,
    out_csv: *const c_char,
) -> CrelStatus {
    guard(|| {
        let p = pipeline_ref(pipeline)?;
        let test = required_str(test_csv, "test_csv")?;
        let out = required_str(out_csv, "out_csv")?;
        let corpus = load_csv(test, &ColumnMapping::default(), false)?;
        let labels = p.predict(&corpus)?;
        let ids: Vec<usize> = corpus.examples().iter().map(|e| e.id).collect();
        let file = std::fs::File::create(out).map_err(|e| Failure(CrelStatus::IoError, format!("{out}: {e}")))?;
        write_predictions(std::io::BufWriter::new(file), &ids, &labels)?;
        Ok(())
    })
}

/// # Safety
/// `pipeline` must be NULL or come from this library and not be used again.
#[no_mangle]
pub unsafe extern "C" fn crel_pipeline_free(pipeline: *mut CrelPipeline) {
    if !pipeline.is_null() {
        drop(Box::from_raw(pipeline));
    }
}

/// Metrics for Useful as the positive class. Labels use the `CrelLabel`
/// encoding.
///
/// # Safety
/// `predicted` and `gold` must point to `len` readable ints; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn crel_compute_metrics(
    predicted: *const c_int,
    gold: *const c_int,
    len: usize,
    out: *mut CrelMetrics,
) -> CrelStatus {
    guard(|| {
        not_null(out, "out")?;
        not_null(predicted, "predicted")?;
        not_null(gold, "gold")?;
        let convert = |p: *const c_int| -> Result<Vec<Label>, Failure> {
            std::slice::from_raw_parts(p, len)
                .iter()
                .enumerate()
                .map(|(i, &v)| label_from_c(v, i))
                .collect()
        };
        let m = compute_metrics(&convert(predicted)?, &convert(gold)?, Label::Useful)?;
        *out = CrelMetrics {
            accuracy: m.accuracy,
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
            true_positives: m.confusion.tp,
            false_positives: m.confusion.fp,
            false_negatives: m.confusion.fn_,
            true_negatives: m.confusion.tn,
        };
        Ok(())
    })
}

/// Registry listing, one run per line. Release with `crel_string_free`.
#[no_mangle]
pub extern "C" fn crel_runs_list() -> *mut c_char {
    CString::new(list_runs()).map_or(ptr::null_mut(), CString::into_raw)
}

/// # Safety
/// `s` must be NULL or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn crel_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
