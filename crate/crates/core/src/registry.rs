//! The five submitted runs: three bag-of-words pipelines and two transformer
//! fine-tuning presets handled by the external fine-tuning component.

use serde::{Deserialize, Serialize};

use crate::classifiers::{ForestHyper, SvmHyper};
use crate::corpus::ViewMode;
use crate::error::{Error, Result};
use crate::features::WeightingScheme;
use crate::pipeline::{ClassifierConfig, RunConfig};
use crate::selection::SelectionMethod;

pub const SELECTED_TERMS: usize = 3000;
pub const FOREST_TREES: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformerPreset {
    pub name: String,
    /// Preset name understood by the fine-tuning component.
    pub preset: String,
    pub model_id: String,
    pub view: ViewMode,
    pub epochs: usize,
    pub warmup_steps: usize,
    pub max_seq_len: usize,
    pub batch_size: usize,
    pub weight_decay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RegistryEntry {
    BagOfWords(RunConfig),
    Transformer(TransformerPreset),
}

impl RegistryEntry {
    pub fn name(&self) -> &str {
        match self {
            RegistryEntry::BagOfWords(c) => &c.name,
            RegistryEntry::Transformer(t) => &t.name,
        }
    }
}

fn forest() -> ClassifierConfig {
    ClassifierConfig::RandomForest(ForestHyper {
        n_trees: FOREST_TREES,
        ..ForestHyper::default()
    })
}

fn transformer(name: &str, preset: &str, model_id: &str, epochs: usize) -> RegistryEntry {
    RegistryEntry::Transformer(TransformerPreset {
        name: name.into(),
        preset: preset.into(),
        model_id: model_id.into(),
        view: ViewMode::CodeAndComments,
        epochs,
        warmup_steps: 500,
        max_seq_len: 432,
        batch_size: 4,
        weight_decay: 0.01,
    })
}

pub fn registry() -> Vec<RegistryEntry> {
    let svm = ClassifierConfig::LinearSvm(SvmHyper {
        cost_c: 1.0,
        gamma: Some("scale".into()),
        ..SvmHyper::default()
    });
    vec![
        RegistryEntry::BagOfWords(
            RunConfig::new("run1", WeightingScheme::TfIdf, forest())
                .with_selection(SelectionMethod::ChiSquare, SELECTED_TERMS),
        ),
        RegistryEntry::BagOfWords(
            RunConfig::new("run2", WeightingScheme::LogEntropy, svm)
                .with_selection(SelectionMethod::ChiSquare, SELECTED_TERMS),
        ),
        RegistryEntry::BagOfWords(
            RunConfig::new("run3", WeightingScheme::LogEntropy, forest())
                .with_selection(SelectionMethod::ChiSquare, SELECTED_TERMS),
        ),
        transformer("run4", "albert", "albert-base-v1", 18),
        transformer("run5", "roberta", "roberta-base", 38),
    ]
}

pub fn find_run(name: &str) -> Result<RegistryEntry> {
    let all = registry();
    let known = all.iter().map(|e| e.name().to_string()).collect::<Vec<_>>().join(", ");
    all.into_iter()
        .find(|e| e.name() == name)
        .ok_or_else(|| Error::UnknownRun {
            name: name.into(),
            known,
        })
}

fn trim_float(v: f64) -> String {
    let s = format!("{v}");
    s.strip_suffix(".0").map(str::to_string).unwrap_or(s)
}

/// One human-readable line with every hyperparameter.
pub fn describe(entry: &RegistryEntry) -> String {
    match entry {
        RegistryEntry::BagOfWords(c) => {
            let weighting = match c.weighting {
                WeightingScheme::TfIdf => "TF-IDF",
                WeightingScheme::LogEntropy => "Entropy",
            };
            let (title, params) = match &c.classifier {
                ClassifierConfig::RandomForest(h) => (
                    "RF",
                    format!(
                        "split=information gain, #trees={}, max_features=sqrt, bootstrap={}",
                        h.n_trees, h.bootstrap
                    ),
                ),
                ClassifierConfig::LinearSvm(h) => {
                    let gamma = match &h.gamma {
                        Some(g) => format!(", gamma={g} (inert for linear kernel)"),
                        None => String::new(),
                    };
                    ("SVM", format!("kernel=linear, C={}{gamma}", trim_float(h.cost_c)))
                }
                ClassifierConfig::LogReg(h) => ("LR", format!("l2={}", trim_float(h.l2_strength))),
            };
            let selection = match c.selection {
                Some(s) => format!(", #terms={}, {}", s.k, s.method),
                None => String::new(),
            };
            format!(
                "{:<5} {weighting} + {title}: view={}, weighting={}{}, {params}{selection}, seed={}",
                c.name,
                c.view.as_str(),
                c.weighting,
                if c.normalize { " (l2-normalized)" } else { "" },
                c.seed,
            )
        }
        RegistryEntry::Transformer(t) => format!(
            "{:<5} {} (transformer, external component): model={}, view={}, epochs={}, warmup={}, max_len={}, batch={}, weight_decay={}",
            t.name,
            t.preset,
            t.model_id,
            t.view.as_str(),
            t.epochs,
            t.warmup_steps,
            t.max_seq_len,
            t.batch_size,
            t.weight_decay,
        ),
    }
}

pub fn list_runs() -> String {
    registry().iter().map(|e| describe(e) + "\n").collect()
}
