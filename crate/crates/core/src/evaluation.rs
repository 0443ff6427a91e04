//! Stratified k-fold cross-validation, confusion metrics and report rendering.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Label};
use crate::error::{Error, Result};
use crate::pipeline::{FittedPipeline, RunConfig};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub assignments: Vec<usize>,
}

impl FoldPlan {
    /// `(training rows, held-out rows)` for `fold`, both ascending.
    pub fn split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        (0..self.assignments.len()).partition(|&i| self.assignments[i] != fold)
    }
}

/// Shuffles each class with a seeded generator and deals it round-robin over
/// the folds. The second class continues where the first stopped so fold
/// sizes also differ by at most one.
pub fn stratified_folds(labels: &[Label], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidConfig("need at least 2 folds".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = vec![0; labels.len()];
    let mut next = 0;
    for (class, name) in [(Label::Useful, "Useful"), (Label::NotUseful, "Not Useful")] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < k {
            return Err(Error::FoldInfeasible {
                k,
                class: name,
                count: members.len(),
            });
        }
        members.shuffle(&mut rng);
        for i in members {
            assignments[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldPlan { k, seed, assignments })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn add(&mut self, other: &ConfusionCounts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
        self.tn += other.tn;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub confusion: ConfusionCounts,
    pub positive_class: Label,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Harmonic mean of precision and recall, 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

impl MetricsReport {
    pub fn from_counts(c: ConfusionCounts, positive_class: Label) -> Self {
        let precision = ratio(c.tp, c.tp + c.fp);
        let recall = ratio(c.tp, c.tp + c.fn_);
        MetricsReport {
            accuracy: ratio(c.tp + c.tn, c.total()),
            precision,
            recall,
            f1: f1_score(precision, recall),
            confusion: c,
            positive_class,
        }
    }
}

pub fn confusion(predicted: &[Label], gold: &[Label], positive: Label) -> Result<ConfusionCounts> {
    if predicted.len() != gold.len() {
        return Err(Error::LengthMismatch {
            predicted: predicted.len(),
            gold: gold.len(),
        });
    }
    let mut c = ConfusionCounts::default();
    for (&p, &g) in predicted.iter().zip(gold) {
        match (p == positive, g == positive) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

pub fn compute_metrics(predicted: &[Label], gold: &[Label], positive: Label) -> Result<MetricsReport> {
    if predicted.is_empty() && gold.is_empty() {
        return Err(Error::LengthMismatch { predicted: 0, gold: 0 });
    }
    Ok(MetricsReport::from_counts(
        confusion(predicted, gold, positive)?,
        positive,
    ))
}

/// Fold-averaged metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub k: usize,
    pub seed: u64,
    pub per_fold: Vec<MetricsReport>,
    #[serde(rename = "macro")]
    pub macro_avg: MacroMetrics,
    pub pooled: MetricsReport,
    /// Out-of-fold prediction for every corpus row.
    pub predictions: Vec<Label>,
}

/// Runs `fit_predict(train_rows, test_rows)` for every fold of a stratified
/// plan and assembles the report. Folds run in parallel; results are ordered
/// by fold id.
pub fn cross_validate_with<F>(labels: &[Label], k: usize, seed: u64, fit_predict: F) -> Result<CvReport>
where
    F: Fn(&[usize], &[usize]) -> Result<Vec<Label>> + Sync,
{
    let plan = stratified_folds(labels, k, seed)?;
    let folds = (0..k)
        .into_par_iter()
        .map(|fold| run_fold(&plan, fold, &fit_predict))
        .collect::<Result<Vec<_>>>()?;
    assemble(labels, k, seed, folds)
}

/// Like [`cross_validate_with`] but evaluates folds one after another on the
/// calling thread, in fold order.
pub fn cross_validate_sequential_with<F>(labels: &[Label], k: usize, seed: u64, fit_predict: F) -> Result<CvReport>
where
    F: Fn(&[usize], &[usize]) -> Result<Vec<Label>>,
{
    let plan = stratified_folds(labels, k, seed)?;
    let folds = (0..k)
        .map(|fold| run_fold(&plan, fold, &fit_predict))
        .collect::<Result<Vec<_>>>()?;
    assemble(labels, k, seed, folds)
}

fn run_fold<F>(plan: &FoldPlan, fold: usize, fit_predict: &F) -> Result<(Vec<usize>, Vec<Label>)>
where
    F: Fn(&[usize], &[usize]) -> Result<Vec<Label>>,
{
    let (train, test) = plan.split(fold);
    let predicted = fit_predict(&train, &test)?;
    if predicted.len() != test.len() {
        return Err(Error::LengthMismatch {
            predicted: predicted.len(),
            gold: test.len(),
        });
    }
    Ok((test, predicted))
}

fn assemble(labels: &[Label], k: usize, seed: u64, folds: Vec<(Vec<usize>, Vec<Label>)>) -> Result<CvReport> {
    let positive = Label::Useful;
    let mut predictions = vec![Label::NotUseful; labels.len()];
    let mut pooled = ConfusionCounts::default();
    let mut per_fold = Vec::with_capacity(k);
    for (test, predicted) in folds {
        let gold: Vec<Label> = test.iter().map(|&i| labels[i]).collect();
        let counts = confusion(&predicted, &gold, positive)?;
        pooled.add(&counts);
        per_fold.push(MetricsReport::from_counts(counts, positive));
        for (&i, &p) in test.iter().zip(&predicted) {
            predictions[i] = p;
        }
    }
    let mean = |f: fn(&MetricsReport) -> f64| per_fold.iter().map(f).sum::<f64>() / k as f64;
    let macro_avg = MacroMetrics {
        accuracy: mean(|m| m.accuracy),
        precision: mean(|m| m.precision),
        recall: mean(|m| m.recall),
        f1: mean(|m| m.f1),
    };
    Ok(CvReport {
        k,
        seed,
        macro_avg,
        pooled: MetricsReport::from_counts(pooled, positive),
        per_fold,
        predictions,
    })
}

/// Pipelines fitted on each fold's training split, in fold order.
pub fn fold_pipelines(corpus: &Corpus, config: &RunConfig, plan: &FoldPlan) -> Result<Vec<FittedPipeline>> {
    (0..plan.k)
        .into_par_iter()
        .map(|fold| FittedPipeline::fit(config, &corpus.subset(&plan.split(fold).0)))
        .collect()
}

/// k-fold cross-validation of a bag-of-words run. Vocabulary, weighting
/// statistics, term selection and classifier are all fitted per training split.
pub fn cross_validate(corpus: &Corpus, config: &RunConfig, k: usize, seed: u64) -> Result<CvReport> {
    let labels = corpus.labels()?;
    cross_validate_with(&labels, k, seed, |train, test| {
        let pipeline = FittedPipeline::fit(config, &corpus.subset(train))?;
        pipeline.predict(&corpus.subset(test))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// Whitespace-aligned plain text.
    Table,
    Markdown,
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "table" => Ok(ReportFormat::Table),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!(
                "unknown format `{other}` (expected table | markdown | json | csv)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ReportBody {
    CrossValidation(CvReport),
    Holdout(MetricsReport),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedReport {
    pub name: String,
    pub config_hash: Option<String>,
    pub seed: Option<u64>,
    pub report: ReportBody,
}

#[derive(Serialize, Deserialize)]
struct ReportDocument {
    schema_version: u32,
    reports: Vec<NamedReport>,
}

/// Rounds half away from zero at two decimals, judged on the decimal value.
pub fn round2(x: f64) -> String {
    let scaled = (x * 100.0 * 1e6).round() / 1e6;
    format!("{:.2}", (scaled + 0.5).floor() / 100.0)
}

struct Row {
    label: String,
    values: [f64; 4],
}

fn rows(reports: &[NamedReport]) -> Vec<Row> {
    let mut out = Vec::new();
    for r in reports {
        match &r.report {
            ReportBody::Holdout(m) => out.push(Row {
                label: r.name.clone(),
                values: [m.accuracy, m.precision, m.recall, m.f1],
            }),
            ReportBody::CrossValidation(cv) => {
                let p = &cv.pooled;
                let m = &cv.macro_avg;
                out.push(Row {
                    label: format!("{} (pooled)", r.name),
                    values: [p.accuracy, p.precision, p.recall, p.f1],
                });
                out.push(Row {
                    label: format!("{} (macro)", r.name),
                    values: [m.accuracy, m.precision, m.recall, m.f1],
                });
            }
        }
    }
    out
}

const HEADERS: [&str; 4] = ["Accuracy", "Precision", "Recall", "F1"];

pub fn render_report(reports: &[NamedReport], format: ReportFormat) -> Result<String> {
    if reports.is_empty() {
        return Err(Error::EmptyReport);
    }
    let mut out = String::new();
    match format {
        ReportFormat::Json => {
            let doc = ReportDocument {
                schema_version: REPORT_SCHEMA_VERSION,
                reports: reports.to_vec(),
            };
            out = serde_json::to_string_pretty(&doc)?;
            out.push('\n');
        }
        ReportFormat::Csv => {
            out.push_str("run,accuracy,precision,recall,f1\n");
            for row in rows(reports) {
                let name = if row.label.contains([',', '"']) {
                    format!("\"{}\"", row.label.replace('"', "\"\""))
                } else {
                    row.label
                };
                let v = row.values;
                let _ = writeln!(out, "{name},{},{},{},{}", v[0], v[1], v[2], v[3]);
            }
        }
        ReportFormat::Table => {
            let rows = rows(reports);
            let width = rows.iter().map(|r| r.label.len()).max().unwrap_or(0).max(3);
            let _ = writeln!(out, "{:<width$} {}", "Run", HEADERS.join(" "));
            for row in rows {
                let cells: Vec<String> = row.values.iter().map(|&v| round2(v)).collect();
                let _ = writeln!(out, "{:<width$} {}", row.label, cells.join(" "));
            }
        }
        ReportFormat::Markdown => {
            let _ = writeln!(out, "| Run | {} |", HEADERS.join(" | "));
            out.push_str("|---|---|---|---|---|\n");
            for row in rows(reports) {
                let cells: Vec<String> = row.values.iter().map(|&v| round2(v)).collect();
                let _ = writeln!(out, "| {} | {} |", row.label, cells.join(" | "));
            }
        }
    }
    Ok(out)
}

/// Parses a document produced by `render_report(.., ReportFormat::Json)`.
pub fn parse_json_report(text: &str) -> Result<Vec<NamedReport>> {
    let doc: ReportDocument = serde_json::from_str(text)?;
    if doc.schema_version != REPORT_SCHEMA_VERSION {
        return Err(Error::UnsupportedVersion {
            found: doc.schema_version,
            expected: REPORT_SCHEMA_VERSION,
        });
    }
    Ok(doc.reports)
}
