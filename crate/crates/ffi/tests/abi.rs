use std::ffi::{c_int, CStr, CString};
use std::path::{Path, PathBuf};
use std::ptr;

use commentrel::corpus::load_csv;
use commentrel::{ColumnMapping, FittedPipeline, Label};
use commentrel_ffi::*;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn c(s: impl AsRef<str>) -> CString {
    CString::new(s.as_ref()).unwrap()
}

fn cpath(p: &Path) -> CString {
    c(p.to_str().unwrap())
}

fn last_error() -> String {
    let p = crel_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn train(run: Option<&str>) -> *mut CrelPipeline {
    let path = cpath(&fixture("synthetic_train.csv"));
    let run = run.map(c);
    let mut handle = ptr::null_mut();
    let status = unsafe {
        crel_pipeline_train(
            path.as_ptr(),
            run.as_ref().map_or(ptr::null(), |r| r.as_ptr()),
            &mut handle,
        )
    };
    assert_eq!(status, CrelStatus::Ok, "{}", last_error());
    assert!(!handle.is_null());
    handle
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(crel_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn single_document_predictions_match_the_library() {
    let handle = train(Some("run2"));
    let schema = ColumnMapping::default();
    let corpus = load_csv(fixture("synthetic_train.csv"), &schema, true).unwrap();
    let test = load_csv(fixture("synthetic_test.csv"), &schema, true).unwrap();
    let config = match commentrel::registry::find_run("run2").unwrap() {
        commentrel::registry::RegistryEntry::BagOfWords(c) => c,
        _ => unreachable!(),
    };
    let reference = FittedPipeline::fit(&config, &corpus).unwrap();
    let expected = reference.predict(&test).unwrap();
    let scores = reference.decision_scores(&test).unwrap();
    for (i, ex) in test.examples().iter().enumerate() {
        let comment = c(&ex.comment_text);
        let mut label: c_int = -1;
        let mut score = f64::NAN;
        unsafe {
            assert_eq!(
                crel_pipeline_predict(handle, comment.as_ptr(), ptr::null(), &mut label),
                CrelStatus::Ok
            );
            assert_eq!(
                crel_pipeline_score(handle, comment.as_ptr(), ptr::null(), &mut score),
                CrelStatus::Ok
            );
        }
        let want = if expected[i] == Label::Useful {
            CrelLabel::Useful
        } else {
            CrelLabel::NotUseful
        };
        assert_eq!(label, want as c_int, "row {i}");
        assert_eq!(score, scores[i]);
    }
    unsafe { crel_pipeline_free(handle) };
}

#[test]
fn save_load_and_batch_predict() {
    let dir = tempfile::tempdir().unwrap();
    let handle = train(None);
    let model = cpath(&dir.path().join("model.json"));
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    let test = cpath(&fixture("synthetic_test_unlabeled.csv"));
    unsafe {
        assert_eq!(crel_pipeline_save(handle, model.as_ptr()), CrelStatus::Ok);
        assert_eq!(
            crel_pipeline_predict_csv(handle, test.as_ptr(), cpath(&out_a).as_ptr()),
            CrelStatus::Ok
        );
        let mut loaded = ptr::null_mut();
        assert_eq!(crel_pipeline_load(model.as_ptr(), &mut loaded), CrelStatus::Ok);
        assert_eq!(
            crel_pipeline_predict_csv(loaded, test.as_ptr(), cpath(&out_b).as_ptr()),
            CrelStatus::Ok
        );
        crel_pipeline_free(loaded);
        crel_pipeline_free(handle);
    }
    let a = std::fs::read_to_string(out_a).unwrap();
    assert_eq!(a, std::fs::read_to_string(out_b).unwrap());
    assert_eq!(a.lines().count(), 61);
}

#[test]
fn errors_set_status_and_message() {
    let mut handle = ptr::null_mut();
    let missing = c("/nonexistent/model.json");
    assert_eq!(
        unsafe { crel_pipeline_load(missing.as_ptr(), &mut handle) },
        CrelStatus::IoError
    );
    assert!(handle.is_null());
    assert!(last_error().contains("/nonexistent/model.json"));

    let train_csv = cpath(&fixture("synthetic_train.csv"));
    let run4 = c("run4");
    assert_eq!(
        unsafe { crel_pipeline_train(train_csv.as_ptr(), run4.as_ptr(), &mut handle) },
        CrelStatus::InvalidArgument
    );
    let bogus = c("run42");
    assert_eq!(
        unsafe { crel_pipeline_train(train_csv.as_ptr(), bogus.as_ptr(), &mut handle) },
        CrelStatus::InvalidArgument
    );
    assert!(last_error().contains("run42"));
    assert_eq!(
        unsafe { crel_pipeline_train(ptr::null(), ptr::null(), &mut handle) },
        CrelStatus::NullArgument
    );

    let h = train(None);
    let mut label = 0;
    let blank = c("   ");
    assert_eq!(
        unsafe { crel_pipeline_predict(h, blank.as_ptr(), ptr::null(), &mut label) },
        CrelStatus::DataError
    );
    let bad_utf8 = [0xffu8, 0xfe, 0];
    assert_eq!(
        unsafe { crel_pipeline_predict(h, bad_utf8.as_ptr().cast(), ptr::null(), &mut label) },
        CrelStatus::InvalidUtf8
    );
    assert_eq!(
        unsafe { crel_pipeline_predict(ptr::null(), blank.as_ptr(), ptr::null(), &mut label) },
        CrelStatus::NullArgument
    );
    unsafe { crel_pipeline_free(h) };
    unsafe { crel_pipeline_free(ptr::null_mut()) };
}

#[test]
fn metrics_through_the_abi() {
    let predicted: [c_int; 6] = [1, 1, 0, 0, 1, 0];
    let gold: [c_int; 6] = [1, 0, 1, 0, 1, 0];
    let mut m = CrelMetrics::default();
    assert_eq!(
        unsafe { crel_compute_metrics(predicted.as_ptr(), gold.as_ptr(), 6, &mut m) },
        CrelStatus::Ok
    );
    assert_eq!(
        (m.true_positives, m.false_positives, m.false_negatives, m.true_negatives),
        (2, 1, 1, 2)
    );
    assert!((m.precision - 2.0 / 3.0).abs() < 1e-15);
    assert!((m.f1 - 2.0 / 3.0).abs() < 1e-15);

    let bad: [c_int; 2] = [1, 2];
    assert_eq!(
        unsafe { crel_compute_metrics(bad.as_ptr(), bad.as_ptr(), 2, &mut m) },
        CrelStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { crel_compute_metrics(gold.as_ptr(), gold.as_ptr(), 0, &mut m) },
        CrelStatus::DataError
    );
}

#[test]
fn runs_list_is_owned_by_the_caller() {
    let s = crel_runs_list();
    let text = unsafe { CStr::from_ptr(s) }.to_string_lossy().into_owned();
    unsafe { crel_string_free(s) };
    assert_eq!(text, commentrel::registry::list_runs());
    assert_eq!(text.lines().count(), 5);
}
