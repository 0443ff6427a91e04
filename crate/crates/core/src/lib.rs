//! Relevance classification of source-code comments with bag-of-words
//! features.
//!
//! The pipeline turns comment text (optionally concatenated with its code) into
//! TF-IDF or log-entropy weighted term vectors, optionally keeps the top terms
//! by chi-square or mutual information, and trains a logistic regression,
//! linear SVM, or random forest. [`evaluation`] provides stratified k-fold
//! cross-validation and the metric reports; [`registry`] holds the predefined
//! runs.

pub mod classifiers;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod finetune;
pub mod fixture;
pub mod matrix;
pub mod pipeline;
pub mod registry;
pub mod selection;

pub use corpus::{ColumnMapping, Corpus, Label, LabeledExample, TextView, ViewMode};
pub use error::{Error, Result};
pub use evaluation::{compute_metrics, cross_validate, CvReport, MetricsReport};
pub use pipeline::{ClassifierConfig, FittedPipeline, RunConfig};
