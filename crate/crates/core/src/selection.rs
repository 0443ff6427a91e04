//! Filter-style term selection by chi-square and mutual information.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::features::Vocabulary;
use crate::matrix::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SelectionMethod {
    ChiSquare,
    MutualInformation,
}

impl SelectionMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SelectionMethod::ChiSquare => "chi2",
            SelectionMethod::MutualInformation => "mi",
        }
    }
}

impl fmt::Display for SelectionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SelectionMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "chi2" => Ok(SelectionMethod::ChiSquare),
            "mi" => Ok(SelectionMethod::MutualInformation),
            other => Err(format!("unknown selection `{other}` (expected chi2 | mi)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TermScores {
    pub method: SelectionMethod,
    pub scores: Vec<f64>,
}

struct ClassSizes {
    useful: usize,
    total: usize,
}

fn class_sizes(rows: usize, labels: &[Label]) -> Result<ClassSizes> {
    if labels.len() != rows {
        return Err(Error::DimensionMismatch {
            expected: rows,
            actual: labels.len(),
        });
    }
    let useful = labels.iter().filter(|&&l| l == Label::Useful).count();
    if useful == 0 || useful == labels.len() {
        return Err(Error::SingleClassCorpus);
    }
    Ok(ClassSizes {
        useful,
        total: labels.len(),
    })
}

fn sorted_sum(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    values.into_iter().sum()
}

/// Chi-square statistic of per-class feature totals against the class priors.
/// Works on raw counts or on weighted values.
pub fn chi2_scores(m: &CsrMatrix, labels: &[Label]) -> Result<TermScores> {
    let sizes = class_sizes(m.rows(), labels)?;
    let prior_u = sizes.useful as f64 / sizes.total as f64;
    let prior_n = (sizes.total - sizes.useful) as f64 / sizes.total as f64;
    let scores = m
        .to_columns()
        .into_iter()
        .map(|column| {
            let (mut u, mut n) = (Vec::new(), Vec::new());
            for (r, v) in column {
                match labels[r] {
                    Label::Useful => u.push(v),
                    Label::NotUseful => n.push(v),
                }
            }
            let observed_u = sorted_sum(u);
            let observed_n = sorted_sum(n);
            let total = observed_u + observed_n;
            if total == 0.0 {
                return 0.0;
            }
            let expected_u = total * prior_u;
            let expected_n = total * prior_n;
            (observed_u - expected_u).powi(2) / expected_u + (observed_n - expected_n).powi(2) / expected_n
        })
        .collect();
    Ok(TermScores {
        method: SelectionMethod::ChiSquare,
        scores,
    })
}

/// Mutual information (bits) between term presence and the class label.
/// Any stored entry counts as presence, so counts and weights give the same result.
pub fn mi_scores(m: &CsrMatrix, labels: &[Label]) -> Result<TermScores> {
    let sizes = class_sizes(m.rows(), labels)?;
    let n = sizes.total as f64;
    let class_n = [sizes.useful as f64, (sizes.total - sizes.useful) as f64];
    let scores = m
        .to_columns()
        .into_iter()
        .map(|column| {
            let present_u = column.iter().filter(|(r, _)| labels[*r] == Label::Useful).count() as f64;
            let present_n = column.len() as f64 - present_u;
            // cells[presence][class]
            let cells = [[class_n[0] - present_u, class_n[1] - present_n], [present_u, present_n]];
            let term = |n_uc: f64, n_u: f64, n_c: f64| {
                if n_uc > 0.0 {
                    n_uc / n * (n * n_uc / (n_u * n_c)).log2()
                } else {
                    0.0
                }
            };
            // Each presence row adds its two class cells first, so swapping the
            // class roles leaves the result bit-identical.
            let mi: f64 = cells
                .iter()
                .map(|row| {
                    let n_u = row[0] + row[1];
                    term(row[0], n_u, class_n[0]) + term(row[1], n_u, class_n[1])
                })
                .sum();
            mi.max(0.0)
        })
        .collect();
    Ok(TermScores {
        method: SelectionMethod::MutualInformation,
        scores,
    })
}

pub fn score_terms(method: SelectionMethod, m: &CsrMatrix, labels: &[Label]) -> Result<TermScores> {
    match method {
        SelectionMethod::ChiSquare => chi2_scores(m, labels),
        SelectionMethod::MutualInformation => mi_scores(m, labels),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedTerms {
    pub method: SelectionMethod,
    pub k: usize,
    pub columns: Vec<usize>,
    pub terms: Vec<String>,
}

/// Top `k` terms by score; ties go to the lexicographically smaller term.
pub fn select_top_k(scores: &TermScores, vocab: &Vocabulary, k: usize) -> Result<SelectedTerms> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be >= 1".into()));
    }
    if scores.scores.len() != vocab.len() {
        return Err(Error::DimensionMismatch {
            expected: vocab.len(),
            actual: scores.scores.len(),
        });
    }
    let terms = vocab.terms();
    let mut order: Vec<usize> = (0..vocab.len()).collect();
    order.sort_by(|&a, &b| {
        scores.scores[b]
            .total_cmp(&scores.scores[a])
            .then_with(|| terms[a].cmp(&terms[b]))
    });
    order.truncate(k);
    Ok(SelectedTerms {
        method: scores.method,
        k,
        terms: order.iter().map(|&c| terms[c].clone()).collect(),
        columns: order,
    })
}

pub fn project_matrix(m: &CsrMatrix, sel: &SelectedTerms) -> Result<CsrMatrix> {
    m.select_columns(&sel.columns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::build_vocabulary;
    use Label::{NotUseful as N, Useful as U};

    fn column(values: &[f64]) -> CsrMatrix {
        let rows: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
        CsrMatrix::from_dense(&rows, 1).unwrap()
    }

    fn vocab(terms: &[&str]) -> Vocabulary {
        build_vocabulary(&[terms.iter().map(|s| s.to_string()).collect()], 1).unwrap()
    }

    #[test]
    fn chi2_examples() {
        let s = chi2_scores(&column(&[1.0, 1.0, 0.0, 0.0]), &[U, U, N, N]).unwrap();
        assert!((s.scores[0] - 2.0).abs() < 1e-12);
        let proportional = chi2_scores(&column(&[3.0, 1.0, 2.0, 2.0]), &[U, U, N, N]).unwrap();
        assert!(proportional.scores[0].abs() < 1e-12);
        let zero = chi2_scores(&column(&[0.0, 0.0, 0.0]), &[U, N, N]).unwrap();
        assert_eq!(zero.scores[0], 0.0);
        assert!(matches!(
            chi2_scores(&column(&[1.0, 0.0]), &[U, U]),
            Err(Error::SingleClassCorpus)
        ));
    }

    #[test]
    fn mi_examples() {
        let everywhere = mi_scores(&column(&[1.0, 2.0, 1.0, 1.0]), &[U, U, N, N]).unwrap();
        assert!(everywhere.scores[0].abs() < 1e-12);
        let indicator = mi_scores(&column(&[1.0, 1.0, 0.0, 0.0]), &[U, U, N, N]).unwrap();
        assert!((indicator.scores[0] - 1.0).abs() < 1e-12);
        // Direct summation over the 2x2 presence/class table in a standalone script.
        let partial = mi_scores(&column(&[1.0, 1.0, 1.0, 0.0]), &[U, U, N, N]).unwrap();
        assert!((partial.scores[0] - 0.31127812445913283).abs() < 1e-12);
    }

    #[test]
    fn top_k_ordering_and_ties() {
        let v = vocab(&["a", "b", "c"]);
        let tied = TermScores {
            method: SelectionMethod::ChiSquare,
            scores: vec![1.0, 1.0, 0.5],
        };
        assert_eq!(select_top_k(&tied, &v, 1).unwrap().terms, vec!["a"]);
        let all = select_top_k(&tied, &v, 10).unwrap();
        assert_eq!(all.columns, vec![0, 1, 2]);

        let v2 = vocab(&["a", "b"]);
        let s = TermScores {
            method: SelectionMethod::ChiSquare,
            scores: vec![0.1, 0.9],
        };
        assert_eq!(select_top_k(&s, &v2, 1).unwrap().terms, vec!["b"]);
        assert!(select_top_k(&s, &v2, 0).is_err());
    }

    #[test]
    fn projection() {
        let m = CsrMatrix::from_dense(&[vec![1.0, 2.0], vec![3.0, 0.0]], 2).unwrap();
        let sel = SelectedTerms {
            method: SelectionMethod::ChiSquare,
            k: 1,
            columns: vec![1],
            terms: vec!["b".into()],
        };
        assert_eq!(project_matrix(&m, &sel).unwrap().to_dense(), vec![vec![2.0], vec![0.0]]);
        let bad = SelectedTerms {
            columns: vec![99],
            ..sel
        };
        assert!(matches!(project_matrix(&m, &bad), Err(Error::ColumnOutOfRange { .. })));
    }

    #[test]
    fn selected_terms_json() {
        let sel = SelectedTerms {
            method: SelectionMethod::MutualInformation,
            k: 2,
            columns: vec![3, 1],
            terms: vec!["free".into(), "alloc".into()],
        };
        let text = serde_json::to_string(&sel).unwrap();
        assert!(text.contains("\"method\":\"MutualInformation\""));
        assert_eq!(serde_json::from_str::<SelectedTerms>(&text).unwrap(), sel);
    }
}
