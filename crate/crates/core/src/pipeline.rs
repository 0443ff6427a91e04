//! End-to-end bag-of-words pipeline: view, tokens, vocabulary, weighting,
//! optional term selection, classifier. Every statistic is fitted on the
//! training corpus only and replayed unchanged at prediction time.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifiers::{
    train_linear_svm, train_logreg, train_random_forest, ForestHyper, LogRegHyper, ModelKind, SvmHyper, TrainedModel,
};
use crate::corpus::{extract_view, Corpus, Label, ViewMode};
use crate::error::{Error, Result};
use crate::features::{
    build_vocabulary, count_matrix, tokenize_all, TermWeights, TokenizerConfig, Vocabulary, WeightingScheme,
};
use crate::matrix::CsrMatrix;
use crate::selection::{project_matrix, score_terms, select_top_k, SelectedTerms, SelectionMethod};

pub const PIPELINE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub method: SelectionMethod,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ClassifierConfig {
    LogReg(LogRegHyper),
    LinearSvm(SvmHyper),
    RandomForest(ForestHyper),
}

impl ClassifierConfig {
    pub fn default_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::LogReg => ClassifierConfig::LogReg(LogRegHyper::default()),
            ModelKind::LinearSvm => ClassifierConfig::LinearSvm(SvmHyper::default()),
            ModelKind::RandomForest => ClassifierConfig::RandomForest(ForestHyper::default()),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ClassifierConfig::LogReg(_) => ModelKind::LogReg,
            ClassifierConfig::LinearSvm(_) => ModelKind::LinearSvm,
            ClassifierConfig::RandomForest(_) => ModelKind::RandomForest,
        }
    }

    fn train(&self, x: &CsrMatrix, y: &[Label], seed: u64) -> Result<TrainedModel> {
        match self {
            ClassifierConfig::LogReg(h) => train_logreg(x, y, &LogRegHyper { seed, ..h.clone() }),
            ClassifierConfig::LinearSvm(h) => train_linear_svm(x, y, &SvmHyper { seed, ..h.clone() }),
            ClassifierConfig::RandomForest(h) => train_random_forest(x, y, &ForestHyper { seed, ..h.clone() }),
        }
    }
}

/// One fully specified bag-of-words experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub name: String,
    pub view: ViewMode,
    pub tokenizer: TokenizerConfig,
    pub min_df: usize,
    pub weighting: WeightingScheme,
    pub normalize: bool,
    pub selection: Option<SelectionConfig>,
    pub classifier: ClassifierConfig,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(name: impl Into<String>, weighting: WeightingScheme, classifier: ClassifierConfig) -> Self {
        RunConfig {
            name: name.into(),
            view: ViewMode::CommentsOnly,
            tokenizer: TokenizerConfig::default(),
            min_df: 1,
            weighting,
            normalize: true,
            selection: None,
            classifier,
            seed: 0,
        }
    }

    pub fn with_selection(mut self, method: SelectionMethod, k: usize) -> Self {
        self.selection = Some(SelectionConfig { method, k });
        self
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// A trained pipeline; serializes to a single versioned JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedPipeline {
    pub format_version: u32,
    pub config: RunConfig,
    pub vocabulary: Vocabulary,
    pub weights: TermWeights,
    pub selection: Option<SelectedTerms>,
    pub model: TrainedModel,
}

impl FittedPipeline {
    pub fn fit(config: &RunConfig, corpus: &Corpus) -> Result<Self> {
        let labels = corpus.labels()?;
        let docs = extract_view(corpus, config.view).documents;
        let tokens = tokenize_all(&docs, &config.tokenizer);
        let vocabulary = build_vocabulary(&tokens, config.min_df)?;
        let counts = count_matrix(&tokens, &vocabulary);
        let weights = TermWeights::fit(config.weighting, &counts, config.normalize);
        let weighted = weights.apply(&counts)?.matrix;
        let (selection, features) = match config.selection {
            Some(sel) => {
                let scores = score_terms(sel.method, &weighted, &labels)?;
                let chosen = select_top_k(&scores, &vocabulary, sel.k)?;
                let projected = project_matrix(&weighted, &chosen)?;
                (Some(chosen), projected)
            }
            None => (None, weighted),
        };
        let model = config.classifier.train(&features, &labels, config.seed)?;
        Ok(FittedPipeline {
            format_version: PIPELINE_FORMAT_VERSION,
            config: config.clone(),
            vocabulary,
            weights,
            selection,
            model,
        })
    }

    /// Feature matrix for `corpus` under the fitted statistics.
    pub fn transform(&self, corpus: &Corpus) -> Result<CsrMatrix> {
        if self.config.view == ViewMode::CodeAndComments && !corpus.has_code() {
            return Err(Error::SchemaMismatch(
                "pipeline was trained on code+comments but the corpus has no code column".into(),
            ));
        }
        let docs = extract_view(corpus, self.config.view).documents;
        let tokens = tokenize_all(&docs, &self.config.tokenizer);
        let counts = count_matrix(&tokens, &self.vocabulary);
        let weighted = self.weights.apply(&counts)?.matrix;
        match &self.selection {
            Some(sel) => project_matrix(&weighted, sel),
            None => Ok(weighted),
        }
    }

    pub fn predict(&self, corpus: &Corpus) -> Result<Vec<Label>> {
        self.model.predict_labels(&self.transform(corpus)?)
    }

    pub fn decision_scores(&self, corpus: &Corpus) -> Result<Vec<f64>> {
        self.model.decision_scores(&self.transform(corpus)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Probe {
            format_version: u32,
        }
        let probe: Probe = serde_json::from_str(text)?;
        if probe.format_version != PIPELINE_FORMAT_VERSION {
            return Err(Error::UnsupportedVersion {
                found: probe.format_version,
                expected: PIPELINE_FORMAT_VERSION,
            });
        }
        let pipeline: FittedPipeline = serde_json::from_str(text)?;
        let expected = pipeline
            .selection
            .as_ref()
            .map_or(pipeline.vocabulary.len(), |s| s.columns.len());
        if pipeline.weights.global.len() != pipeline.vocabulary.len() || pipeline.model.feature_count() != expected {
            return Err(Error::SchemaMismatch(
                "pipeline components disagree on feature counts".into(),
            ));
        }
        Ok(pipeline)
    }

    /// Writes to a sibling temp file then renames it into place.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, self.to_json()?).map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        FittedPipeline::from_json(&text)
    }
}
