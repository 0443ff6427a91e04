//! Logistic regression, linear SVM and random forest over sparse rows.
//!
//! Linear models encode `Useful` as +1 and `NotUseful` as -1 and predict
//! `Useful` when `w.x + b > 0`. The forest scores a row by its fraction of
//! `Useful` votes and predicts `Useful` only above one half.

mod forest;
mod logreg;
mod svm;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::matrix::CsrMatrix;

pub use forest::{train_random_forest, ForestHyper, MaxFeatures, SplitMeasure, Tree, TreeNode};
pub use logreg::{logistic_gradient, logistic_objective, train_logreg, train_logreg_traced, LogRegHyper};
pub use svm::{svm_objective, train_linear_svm, Kernel, SvmHyper};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    LogReg,
    LinearSvm,
    RandomForest,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::LogReg => "logreg",
            ModelKind::LinearSvm => "svm",
            ModelKind::RandomForest => "rf",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "logreg" => Ok(ModelKind::LogReg),
            "svm" => Ok(ModelKind::LinearSvm),
            "rf" => Ok(ModelKind::RandomForest),
            other => Err(format!("unknown classifier `{other}` (expected logreg | svm | rf)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelParams {
    LogReg {
        hyper: LogRegHyper,
        weights: Vec<f64>,
        bias: f64,
        iterations: usize,
        objective: f64,
    },
    LinearSvm {
        hyper: SvmHyper,
        weights: Vec<f64>,
        bias: f64,
        epochs: usize,
        objective: f64,
    },
    RandomForest {
        hyper: ForestHyper,
        trees: Vec<Tree>,
    },
}

/// A fitted classifier. Fields are private; the model cannot change after training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    positive_class: Label,
    feature_count: usize,
    params: ModelParams,
}

impl TrainedModel {
    pub(crate) fn new(feature_count: usize, params: ModelParams) -> Self {
        TrainedModel {
            positive_class: Label::Useful,
            feature_count,
            params,
        }
    }

    /// A logistic-regression model with explicit parameters.
    pub fn logreg_from_parts(weights: Vec<f64>, bias: f64) -> Self {
        TrainedModel::new(
            weights.len(),
            ModelParams::LogReg {
                hyper: LogRegHyper::default(),
                weights,
                bias,
                iterations: 0,
                objective: f64::NAN,
            },
        )
    }

    /// A forest assembled from prebuilt trees.
    pub fn forest_from_trees(feature_count: usize, trees: Vec<Tree>) -> Self {
        let hyper = ForestHyper {
            n_trees: trees.len(),
            ..ForestHyper::default()
        };
        TrainedModel::new(feature_count, ModelParams::RandomForest { hyper, trees })
    }

    pub fn kind(&self) -> ModelKind {
        match self.params {
            ModelParams::LogReg { .. } => ModelKind::LogReg,
            ModelParams::LinearSvm { .. } => ModelKind::LinearSvm,
            ModelParams::RandomForest { .. } => ModelKind::RandomForest,
        }
    }

    pub fn positive_class(&self) -> Label {
        self.positive_class
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// `(weights, bias)` for linear models.
    pub fn linear_parameters(&self) -> Option<(&[f64], f64)> {
        match &self.params {
            ModelParams::LogReg { weights, bias, .. } | ModelParams::LinearSvm { weights, bias, .. } => {
                Some((weights, *bias))
            }
            ModelParams::RandomForest { .. } => None,
        }
    }

    /// Final training objective for linear models.
    pub fn objective(&self) -> Option<f64> {
        match &self.params {
            ModelParams::LogReg { objective, .. } | ModelParams::LinearSvm { objective, .. } => Some(*objective),
            ModelParams::RandomForest { .. } => None,
        }
    }

    fn check_width(&self, x: &CsrMatrix) -> Result<()> {
        if x.cols() != self.feature_count {
            return Err(Error::DimensionMismatch {
                expected: self.feature_count,
                actual: x.cols(),
            });
        }
        Ok(())
    }

    /// Signed margin `w.x + b` for linear models, `Useful` vote share for forests.
    pub fn decision_scores(&self, x: &CsrMatrix) -> Result<Vec<f64>> {
        self.check_width(x)?;
        Ok(match &self.params {
            ModelParams::LogReg { weights, bias, .. } | ModelParams::LinearSvm { weights, bias, .. } => {
                (0..x.rows()).map(|r| x.row_dot(r, weights) + bias).collect()
            }
            ModelParams::RandomForest { trees, .. } => (0..x.rows())
                .map(|r| {
                    let (idx, vals) = x.row(r);
                    let useful = trees
                        .iter()
                        .filter(|t| t.predict_row(idx, vals) == Label::Useful)
                        .count();
                    useful as f64 / trees.len() as f64
                })
                .collect(),
        })
    }

    pub fn threshold(&self) -> f64 {
        match self.params {
            ModelParams::RandomForest { .. } => 0.5,
            _ => 0.0,
        }
    }

    pub fn predict_labels(&self, x: &CsrMatrix) -> Result<Vec<Label>> {
        let threshold = self.threshold();
        Ok(self
            .decision_scores(x)?
            .into_iter()
            .map(|s| if s > threshold { Label::Useful } else { Label::NotUseful })
            .collect())
    }
}

pub fn predict_labels(model: &TrainedModel, x: &CsrMatrix) -> Result<Vec<Label>> {
    model.predict_labels(x)
}

pub fn decision_scores(model: &TrainedModel, x: &CsrMatrix) -> Result<Vec<f64>> {
    model.decision_scores(x)
}

/// Shared training preconditions: matching lengths, both classes, non-empty features.
/// True for finite-or-infinite values above zero; false for NaN.
pub(crate) fn positive(v: f64) -> bool {
    v > 0.0
}

pub(crate) fn check_training_data(x: &CsrMatrix, y: &[Label]) -> Result<()> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            actual: y.len(),
        });
    }
    if x.cols() == 0 {
        return Err(Error::DimensionMismatch { expected: 1, actual: 0 });
    }
    let useful = y.iter().filter(|&&l| l == Label::Useful).count();
    if useful == 0 || useful == y.len() {
        return Err(Error::SingleClassCorpus);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_positive_bias_is_all_useful() {
        let model = TrainedModel::logreg_from_parts(vec![0.0, 0.0], 0.5);
        let x = CsrMatrix::from_dense(&[vec![1.0, -3.0], vec![0.0, 0.0]], 2).unwrap();
        assert_eq!(model.predict_labels(&x).unwrap(), vec![Label::Useful; 2]);
    }

    #[test]
    fn linear_score_is_dot_product() {
        let model = TrainedModel::logreg_from_parts(vec![1.0, 0.0], 0.0);
        let x = CsrMatrix::from_dense(&[vec![2.0, 5.0]], 2).unwrap();
        assert_eq!(model.decision_scores(&x).unwrap(), vec![2.0]);
        assert!(model.decision_scores(&CsrMatrix::zeros(0, 2)).unwrap().is_empty());
    }

    #[test]
    fn width_mismatch() {
        let model = TrainedModel::logreg_from_parts(vec![1.0, 0.0], 0.0);
        assert!(matches!(
            model.predict_labels(&CsrMatrix::zeros(1, 3)),
            Err(Error::DimensionMismatch { expected: 2, actual: 3 })
        ));
    }

    #[test]
    fn single_leaf_forest() {
        let model = TrainedModel::forest_from_trees(2, vec![Tree::leaf(Label::NotUseful); 3]);
        let x = CsrMatrix::from_dense(&[vec![1.0, 1.0], vec![0.0, 9.0]], 2).unwrap();
        assert_eq!(model.predict_labels(&x).unwrap(), vec![Label::NotUseful; 2]);
    }

    #[test]
    fn forest_tie_goes_to_not_useful() {
        let mut trees = vec![Tree::leaf(Label::Useful); 25];
        trees.extend(vec![Tree::leaf(Label::NotUseful); 25]);
        let model = TrainedModel::forest_from_trees(1, trees);
        let x = CsrMatrix::zeros(1, 1);
        assert_eq!(model.decision_scores(&x).unwrap(), vec![0.5]);
        assert_eq!(model.predict_labels(&x).unwrap(), vec![Label::NotUseful]);
    }
}
