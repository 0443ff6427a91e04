//! Subprocess bridge to the transformer fine-tuning component.
//!
//! The component is an executable named `commentrel-finetune` (or the path in
//! `COMMENTREL_FINETUNE`) that implements:
//!
//! ```text
//! commentrel-finetune finetune --preset {albert|roberta} --train <csv> --out <dir>
//! commentrel-finetune predict --checkpoint <dir> --test <csv> --out <csv>
//! ```
//!
//! Corpus CSVs use the `comment,code,label` header and predictions come back
//! as `id,predicted_label` with ids counting test rows from 0.

use std::ffi::OsStr;
use std::path::{Path, PathBuf};
use std::process::Command;

use crate::corpus::{load_predictions, ColumnMapping, Corpus, Label};
use crate::error::{Error, Result};
use crate::evaluation::{cross_validate_sequential_with, CvReport};
use crate::registry::TransformerPreset;

pub const COMPONENT_ENV: &str = "COMMENTREL_FINETUNE";
pub const COMPONENT_BIN: &str = "commentrel-finetune";

/// Resolves the component executable from the environment or `PATH`.
pub fn locate_component() -> Result<PathBuf> {
    if let Some(path) = std::env::var_os(COMPONENT_ENV) {
        let path = PathBuf::from(path);
        if path.is_file() {
            return Ok(path);
        }
        return Err(Error::MissingComponent(format!(
            "{COMPONENT_ENV} points at {}, which does not exist",
            path.display()
        )));
    }
    std::env::var_os("PATH")
        .iter()
        .flat_map(std::env::split_paths)
        .map(|dir| dir.join(COMPONENT_BIN))
        .find(|p| p.is_file())
        .ok_or_else(|| {
            Error::MissingComponent(format!(
                "`{COMPONENT_BIN}` not found on PATH; install the fine-tuning component or set {COMPONENT_ENV}"
            ))
        })
}

fn invoke<I, S>(exe: &Path, args: I) -> Result<()>
where
    I: IntoIterator<Item = S>,
    S: AsRef<OsStr>,
{
    let output = Command::new(exe)
        .args(args)
        .output()
        .map_err(|e| Error::MissingComponent(format!("cannot start {}: {e}", exe.display())))?;
    if !output.status.success() {
        return Err(Error::ComponentFailed(format!(
            "{} exited with {}: {}",
            exe.display(),
            output.status,
            String::from_utf8_lossy(&output.stderr).trim()
        )));
    }
    Ok(())
}

pub fn finetune(exe: &Path, preset: &TransformerPreset, train_csv: &Path, out_dir: &Path) -> Result<()> {
    invoke(
        exe,
        [
            OsStr::new("finetune"),
            OsStr::new("--preset"),
            OsStr::new(&preset.preset),
            OsStr::new("--train"),
            train_csv.as_os_str(),
            OsStr::new("--out"),
            out_dir.as_os_str(),
        ],
    )
}

pub fn predict(exe: &Path, checkpoint: &Path, test_csv: &Path, out_csv: &Path) -> Result<()> {
    invoke(
        exe,
        [
            OsStr::new("predict"),
            OsStr::new("--checkpoint"),
            checkpoint.as_os_str(),
            OsStr::new("--test"),
            test_csv.as_os_str(),
            OsStr::new("--out"),
            out_csv.as_os_str(),
        ],
    )
}

/// Reads a prediction file and orders it by id, requiring ids `0..expected`.
pub fn read_ordered_predictions(path: &Path, expected: usize) -> Result<Vec<Label>> {
    let rows = load_predictions(path)?;
    let mut out = vec![None; expected];
    for (id, label) in rows {
        match out.get_mut(id) {
            Some(slot @ None) => *slot = Some(label),
            _ => {
                return Err(Error::SchemaMismatch(format!(
                    "prediction id {id} is duplicated or outside 0..{expected}"
                )))
            }
        }
    }
    out.into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::SchemaMismatch(format!("expected {expected} predictions")))
}

fn write_corpus(corpus: &Corpus, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    corpus.write_csv(file, &ColumnMapping::default())
}

/// Cross-validates a transformer preset by shelling out once per fold. Folds
/// run one at a time; `workdir` receives the per-fold CSVs and checkpoints.
pub fn cross_validate_transformer(
    exe: &Path,
    preset: &TransformerPreset,
    corpus: &Corpus,
    k: usize,
    seed: u64,
    workdir: &Path,
) -> Result<CvReport> {
    let labels = corpus.labels()?;
    let next_fold = std::sync::atomic::AtomicUsize::new(0);
    cross_validate_sequential_with(&labels, k, seed, |train, test| {
        let fold = next_fold.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
        let dir = workdir.join(format!("fold{fold:02}"));
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let train_csv = dir.join("train.csv");
        let test_csv = dir.join("test.csv");
        let checkpoint = dir.join("checkpoint");
        let pred_csv = dir.join("predictions.csv");
        write_corpus(&corpus.subset(train), &train_csv)?;
        write_corpus(&corpus.subset(test), &test_csv)?;
        finetune(exe, preset, &train_csv, &checkpoint)?;
        predict(exe, &checkpoint, &test_csv, &pred_csv)?;
        read_ordered_predictions(&pred_csv, test.len())
    })
}
