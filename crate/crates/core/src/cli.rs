//! `commentrel` command-line interface.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 missing component.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::classifiers::ModelKind;
use crate::corpus::{corpus_stats, load_csv, load_predictions, write_predictions, ColumnMapping, Label, ViewMode};
use crate::error::{Error, Result};
use crate::evaluation::{
    compute_metrics, cross_validate, parse_json_report, render_report, NamedReport, ReportBody, ReportFormat,
};
use crate::features::WeightingScheme;
use crate::finetune;
use crate::fixture::synthetic_corpus;
use crate::pipeline::{ClassifierConfig, FittedPipeline, RunConfig, SelectionConfig};
use crate::registry::{find_run, list_runs, RegistryEntry};
use crate::selection::SelectionMethod;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_MISSING_COMPONENT: u8 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "commentrel",
    version,
    about = "Classify source-code comments as useful or not useful"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inspect the run registry.
    Runs {
        #[command(subcommand)]
        action: RunsAction,
    },
    /// Cross-validate a run or train it on the full corpus.
    Run(RunArgs),
    /// Label a test corpus with a saved model.
    Predict(PredictArgs),
    /// Score prediction files or re-render saved JSON reports.
    Report(ReportArgs),
    /// Print corpus statistics.
    Stats(StatsArgs),
    /// Write the deterministic synthetic corpus.
    Fixture(FixtureArgs),
}

#[derive(Debug, Subcommand)]
pub enum RunsAction {
    /// List every registered run with its hyperparameters.
    List,
}

#[derive(Debug, Clone, Args)]
pub struct ColumnArgs {
    #[arg(long, default_value = "comment")]
    pub comment_col: String,
    #[arg(long, default_value = "code")]
    pub code_col: String,
    #[arg(long, default_value = "label")]
    pub label_col: String,
}

impl ColumnArgs {
    fn mapping(&self) -> ColumnMapping {
        ColumnMapping {
            comment: self.comment_col.clone(),
            code: self.code_col.clone(),
            label: self.label_col.clone(),
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Registry run to start from; flags below override its settings.
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long)]
    pub train: PathBuf,
    /// k-fold cross-validation (the default mode).
    #[arg(long, conflicts_with = "fit_full")]
    pub cv: bool,
    /// Train on the whole corpus and save the pipeline to --out.
    #[arg(long)]
    pub fit_full: bool,
    /// Model file (or checkpoint directory for transformer runs) in --fit-full mode.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub view: Option<ViewMode>,
    #[arg(long)]
    pub weighting: Option<WeightingScheme>,
    #[arg(long)]
    pub select: Option<SelectionMethod>,
    /// Disable term selection.
    #[arg(long, conflicts_with_all = ["select", "k_terms"])]
    pub no_select: bool,
    #[arg(long)]
    pub k_terms: Option<usize>,
    #[arg(long)]
    pub classifier: Option<ModelKind>,
    /// SVM cost parameter.
    #[arg(long = "c")]
    pub cost_c: Option<f64>,
    /// Logistic-regression L2 strength.
    #[arg(long)]
    pub l2: Option<f64>,
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long)]
    pub min_df: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "table")]
    pub format: ReportFormat,
    /// Also write the report here.
    #[arg(long)]
    pub report_out: Option<PathBuf>,
    /// In --fit-full mode, also write the training feature matrix as triplets.
    #[arg(long)]
    pub export_matrix: Option<PathBuf>,
    /// Scratch directory for transformer cross-validation.
    #[arg(long)]
    pub workdir: Option<PathBuf>,
    #[command(flatten)]
    pub columns: ColumnArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Saved pipeline JSON, or a transformer checkpoint directory.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "table")]
    pub format: ReportFormat,
    #[command(flatten)]
    pub columns: ColumnArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Prediction file(s) in `id,predicted_label` form.
    #[arg(long, num_args = 1.., requires = "gold")]
    pub predictions: Vec<PathBuf>,
    /// Labeled corpus the predictions refer to.
    #[arg(long)]
    pub gold: Option<PathBuf>,
    /// JSON reports written by `run --format json`.
    #[arg(long, num_args = 1..)]
    pub input: Vec<PathBuf>,
    #[arg(long, default_value = "table")]
    pub format: ReportFormat,
    #[command(flatten)]
    pub columns: ColumnArgs,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[command(flatten)]
    pub columns: ColumnArgs,
}

#[derive(Debug, Args)]
pub struct FixtureArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value_t = 2022)]
    pub seed: u64,
    #[arg(long)]
    pub separable: bool,
    /// Omit the label column.
    #[arg(long)]
    pub unlabeled: bool,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::MissingComponent(_) => EXIT_MISSING_COMPONENT,
        Error::UnknownRun { .. } | Error::InvalidConfig(_) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let stdout = std::io::stdout();
    match execute(cli.command, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Runs {
            action: RunsAction::List,
        } => emit(out, &list_runs()),
        Command::Run(args) => run(args, out),
        Command::Predict(args) => predict(args, out),
        Command::Report(args) => report(args, out),
        Command::Stats(args) => {
            let corpus = load_csv(&args.train, &args.columns.mapping(), true)?;
            let stats = corpus_stats(&corpus)?;
            emit(out, &format!("{}\n", serde_json::to_string_pretty(&stats)?))
        }
        Command::Fixture(args) => {
            let corpus = synthetic_corpus(args.n, args.seed, args.separable);
            let corpus = if args.unlabeled {
                let rows: Vec<_> = corpus
                    .examples()
                    .iter()
                    .cloned()
                    .map(|mut e| {
                        e.label = None;
                        e
                    })
                    .collect();
                crate::corpus::Corpus::new(rows, true)?
            } else {
                corpus
            };
            let file = std::fs::File::create(&args.out).map_err(|e| Error::io(&args.out, e))?;
            corpus.write_csv(file, &ColumnMapping::default())
        }
    }
}

/// Applies command-line overrides to a registry (or default) configuration.
fn resolve_config(args: &RunArgs, base: Option<RunConfig>) -> Result<RunConfig> {
    let mut config = base.unwrap_or_else(|| {
        RunConfig::new(
            "custom",
            WeightingScheme::TfIdf,
            ClassifierConfig::default_for(ModelKind::LogReg),
        )
    });
    if let Some(view) = args.view {
        config.view = view;
    }
    if let Some(w) = args.weighting {
        config.weighting = w;
    }
    if let Some(kind) = args.classifier {
        if kind != config.classifier.kind() {
            config.classifier = ClassifierConfig::default_for(kind);
        }
    }
    if args.no_select {
        config.selection = None;
    } else if args.select.is_some() || args.k_terms.is_some() {
        let current = config.selection.unwrap_or(SelectionConfig {
            method: SelectionMethod::ChiSquare,
            k: crate::registry::SELECTED_TERMS,
        });
        config.selection = Some(SelectionConfig {
            method: args.select.unwrap_or(current.method),
            k: args.k_terms.unwrap_or(current.k),
        });
    }
    if let Some(min_df) = args.min_df {
        config.min_df = min_df;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    match &mut config.classifier {
        ClassifierConfig::LinearSvm(h) => {
            if let Some(c) = args.cost_c {
                h.cost_c = c;
            }
        }
        ClassifierConfig::LogReg(h) => {
            if let Some(l2) = args.l2 {
                h.l2_strength = l2;
            }
        }
        ClassifierConfig::RandomForest(h) => {
            if let Some(t) = args.trees {
                h.n_trees = t;
            }
        }
    }
    let stray = match config.classifier {
        ClassifierConfig::LinearSvm(_) => args.l2.is_some() || args.trees.is_some(),
        ClassifierConfig::LogReg(_) => args.cost_c.is_some() || args.trees.is_some(),
        ClassifierConfig::RandomForest(_) => args.cost_c.is_some() || args.l2.is_some(),
    };
    if stray {
        return Err(Error::InvalidConfig(format!(
            "--c, --l2 and --trees apply only to svm, logreg and rf respectively (classifier is {})",
            config.classifier.kind()
        )));
    }
    Ok(config)
}

fn run(args: RunArgs, out: &mut dyn Write) -> Result<()> {
    let entry = match &args.name {
        Some(name) => Some(find_run(name)?),
        None => None,
    };
    match entry {
        Some(RegistryEntry::Transformer(preset)) => run_transformer(&args, &preset, out),
        Some(RegistryEntry::BagOfWords(config)) => run_bag_of_words(&args, resolve_config(&args, Some(config))?, out),
        None => run_bag_of_words(&args, resolve_config(&args, None)?, out),
    }
}

fn finish_report(args: &RunArgs, reports: &[NamedReport], out: &mut dyn Write) -> Result<()> {
    let text = render_report(reports, args.format)?;
    if let Some(path) = &args.report_out {
        write_file(path, &text)?;
    }
    emit(out, &text)
}

fn run_bag_of_words(args: &RunArgs, config: RunConfig, out: &mut dyn Write) -> Result<()> {
    let corpus = load_csv(&args.train, &args.columns.mapping(), true)?;
    if config.view == ViewMode::CodeAndComments && !corpus.has_code() {
        return Err(Error::SchemaMismatch(format!(
            "view code+comments needs a `{}` column",
            args.columns.code_col
        )));
    }
    if args.fit_full {
        let path = args
            .out
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("--fit-full requires --out".into()))?;
        let pipeline = FittedPipeline::fit(&config, &corpus)?;
        pipeline.save(path)?;
        if let Some(matrix_path) = &args.export_matrix {
            let mut text = Vec::new();
            pipeline
                .transform(&corpus)?
                .write_triplets(&mut text)
                .map_err(|e| Error::io(matrix_path, e))?;
            std::fs::write(matrix_path, text).map_err(|e| Error::io(matrix_path, e))?;
        }
        let predicted = pipeline.predict(&corpus)?;
        let metrics = compute_metrics(&predicted, &corpus.labels()?, Label::Useful)?;
        let reports = [NamedReport {
            name: format!("{} (training fit)", config.name),
            config_hash: Some(config.config_hash()),
            seed: Some(config.seed),
            report: ReportBody::Holdout(metrics),
        }];
        return finish_report(args, &reports, out);
    }
    let cv = cross_validate(&corpus, &config, args.folds, config.seed)?;
    let reports = [NamedReport {
        name: config.name.clone(),
        config_hash: Some(config.config_hash()),
        seed: Some(config.seed),
        report: ReportBody::CrossValidation(cv),
    }];
    finish_report(args, &reports, out)
}

fn run_transformer(args: &RunArgs, preset: &crate::registry::TransformerPreset, out: &mut dyn Write) -> Result<()> {
    let exe = finetune::locate_component()?;
    let seed = args.seed.unwrap_or(0);
    if args.fit_full {
        let dir = args
            .out
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("--fit-full requires --out".into()))?;
        return finetune::finetune(&exe, preset, &args.train, dir);
    }
    let corpus = load_csv(&args.train, &args.columns.mapping(), true)?;
    let scratch;
    let workdir = match &args.workdir {
        Some(dir) => dir.clone(),
        None => {
            scratch = std::env::temp_dir().join(format!("commentrel-{}-{}", preset.name, std::process::id()));
            scratch.clone()
        }
    };
    let cv = finetune::cross_validate_transformer(&exe, preset, &corpus, args.folds, seed, &workdir)?;
    let reports = [NamedReport {
        name: preset.name.clone(),
        config_hash: None,
        seed: Some(seed),
        report: ReportBody::CrossValidation(cv),
    }];
    finish_report(args, &reports, out)
}

fn predict(args: PredictArgs, out: &mut dyn Write) -> Result<()> {
    let mapping = args.columns.mapping();
    if args.model.is_dir() {
        let exe = finetune::locate_component()?;
        finetune::predict(&exe, &args.model, &args.test, &args.out)?;
        let corpus = load_csv(&args.test, &mapping, false)?;
        let predicted = finetune::read_ordered_predictions(&args.out, corpus.len())?;
        return report_if_labeled(&corpus, &predicted, args.format, out);
    }
    let pipeline = FittedPipeline::load(&args.model)?;
    let corpus = load_csv(&args.test, &mapping, false)?;
    let predicted = pipeline.predict(&corpus)?;
    let ids: Vec<usize> = corpus.examples().iter().map(|e| e.id).collect();
    let file = std::fs::File::create(&args.out).map_err(|e| Error::io(&args.out, e))?;
    write_predictions(std::io::BufWriter::new(file), &ids, &predicted)?;
    report_if_labeled(&corpus, &predicted, args.format, out)
}

fn report_if_labeled(
    corpus: &crate::corpus::Corpus,
    predicted: &[Label],
    format: ReportFormat,
    out: &mut dyn Write,
) -> Result<()> {
    if !corpus.is_labeled() {
        return Ok(());
    }
    let metrics = compute_metrics(predicted, &corpus.labels()?, Label::Useful)?;
    let reports = [NamedReport {
        name: "test".into(),
        config_hash: None,
        seed: None,
        report: ReportBody::Holdout(metrics),
    }];
    emit(out, &render_report(&reports, format)?)
}

fn report(args: ReportArgs, out: &mut dyn Write) -> Result<()> {
    let mut reports = Vec::new();
    for path in &args.input {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        reports.extend(parse_json_report(&text)?);
    }
    if let Some(gold_path) = &args.gold {
        let gold = load_csv(gold_path, &args.columns.mapping(), true)?;
        let labels = gold.labels()?;
        for path in &args.predictions {
            let rows = load_predictions(path)?;
            if rows.len() != labels.len() {
                return Err(Error::LengthMismatch {
                    predicted: rows.len(),
                    gold: labels.len(),
                });
            }
            let mut predicted = vec![None; labels.len()];
            for (id, label) in rows {
                match predicted.get_mut(id) {
                    Some(slot @ None) => *slot = Some(label),
                    _ => {
                        return Err(Error::SchemaMismatch(format!(
                            "{}: id {id} duplicated or not in the gold corpus",
                            path.display()
                        )))
                    }
                }
            }
            let predicted: Vec<Label> = predicted.into_iter().map(|p| p.expect("all ids filled")).collect();
            let metrics = compute_metrics(&predicted, &labels, Label::Useful)?;
            reports.push(NamedReport {
                name: path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.display().to_string()),
                config_hash: None,
                seed: None,
                report: ReportBody::Holdout(metrics),
            });
        }
    }
    emit(out, &render_report(&reports, args.format)?)
}
