//! Tokenization, vocabulary construction and term weighting.
//!
//! Two weighting schemes are provided. TF-IDF uses the smoothed inverse
//! document frequency `ln((1 + N) / (1 + df)) + 1`. Log-entropy multiplies a
//! local `log2(1 + tf)` by a global `1 + sum_j p_ij log2 p_ij / log2(N + 1)`,
//! where `p_ij = tf_ij / gf_i` is the share of term `i`'s occurrences falling in
//! document `j`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::CsrMatrix;

pub const VOCABULARY_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizerConfig {
    pub lowercase: bool,
    pub min_token_len: usize,
    pub stopwords: BTreeSet<String>,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            lowercase: true,
            min_token_len: 2,
            stopwords: BTreeSet::new(),
        }
    }
}

/// Splits `text` into maximal runs of ASCII letters and digits, keeping runs of
/// at least `min_token_len` characters.
pub fn tokenize(text: &str, config: &TokenizerConfig) -> Vec<String> {
    text.split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|t| t.len() >= config.min_token_len.max(1))
        .map(|t| {
            if config.lowercase {
                t.to_ascii_lowercase()
            } else {
                t.to_string()
            }
        })
        .filter(|t| !config.stopwords.contains(t))
        .collect()
}

/// Tokenizes every document. Output order follows input order.
pub fn tokenize_all(docs: &[String], config: &TokenizerConfig) -> Vec<Vec<String>> {
    docs.par_iter().map(|d| tokenize(d, config)).collect()
}

/// Sorted term list with its inverse index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    min_df: usize,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    version: u32,
    min_df: usize,
    terms: Vec<String>,
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        VocabularyRepr {
            version: VOCABULARY_FORMAT_VERSION,
            min_df: v.min_df,
            terms: v.terms,
        }
    }
}

impl TryFrom<VocabularyRepr> for Vocabulary {
    type Error = Error;

    fn try_from(r: VocabularyRepr) -> Result<Self> {
        if r.version != VOCABULARY_FORMAT_VERSION {
            return Err(Error::UnsupportedVersion {
                found: r.version,
                expected: VOCABULARY_FORMAT_VERSION,
            });
        }
        if r.terms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::SchemaMismatch("vocabulary terms must be strictly sorted".into()));
        }
        Ok(Vocabulary::from_sorted(r.terms, r.min_df))
    }
}

impl Vocabulary {
    fn from_sorted(terms: Vec<String>, min_df: usize) -> Self {
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocabulary { terms, index, min_df }
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn min_df(&self) -> usize {
        self.min_df
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Keeps every term whose document frequency is at least `min_df`.
pub fn build_vocabulary(docs: &[Vec<String>], min_df: usize) -> Result<Vocabulary> {
    if min_df == 0 {
        return Err(Error::InvalidConfig("min_df must be >= 1".into()));
    }
    let df = docs
        .par_iter()
        .map(|doc| {
            let mut local = BTreeMap::new();
            for t in doc.iter().collect::<BTreeSet<_>>() {
                local.insert(t.as_str(), 1usize);
            }
            local
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (t, n) in b {
                *a.entry(t).or_insert(0) += n;
            }
            a
        });
    let terms: Vec<String> = df
        .into_iter()
        .filter(|&(_, n)| n >= min_df)
        .map(|(t, _)| t.to_string())
        .collect();
    if terms.is_empty() {
        return Err(Error::EmptyVocabulary { min_df });
    }
    Ok(Vocabulary::from_sorted(terms, min_df))
}

/// Raw term counts: entry `(j, i)` is the number of times term `i` occurs in
/// document `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct DocTermMatrix {
    counts: CsrMatrix,
}

impl DocTermMatrix {
    pub fn from_counts(counts: CsrMatrix) -> Result<Self> {
        if counts.triplets().any(|(_, _, v)| v <= 0.0 || v.fract() != 0.0) {
            return Err(Error::InvalidConfig("counts must be positive integers".into()));
        }
        Ok(DocTermMatrix { counts })
    }

    pub fn rows(&self) -> usize {
        self.counts.rows()
    }

    pub fn cols(&self) -> usize {
        self.counts.cols()
    }

    pub fn count(&self, doc: usize, term: usize) -> u32 {
        self.counts.get(doc, term) as u32
    }

    pub fn as_matrix(&self) -> &CsrMatrix {
        &self.counts
    }

    pub fn select_rows(&self, rows: &[usize]) -> DocTermMatrix {
        DocTermMatrix {
            counts: self.counts.select_rows(rows),
        }
    }
}

pub fn count_matrix(docs: &[Vec<String>], vocab: &Vocabulary) -> DocTermMatrix {
    let rows = docs
        .par_iter()
        .map(|doc| {
            let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
            for t in doc {
                if let Some(i) = vocab.index_of(t) {
                    *counts.entry(i).or_insert(0.0) += 1.0;
                }
            }
            counts.into_iter().collect()
        })
        .collect();
    let counts = CsrMatrix::from_rows(vocab.len(), rows).expect("vocabulary indices are in range");
    DocTermMatrix { counts }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WeightingScheme {
    TfIdf,
    LogEntropy,
}

impl WeightingScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            WeightingScheme::TfIdf => "tfidf",
            WeightingScheme::LogEntropy => "logentropy",
        }
    }
}

impl fmt::Display for WeightingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WeightingScheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "tfidf" => Ok(WeightingScheme::TfIdf),
            "logentropy" => Ok(WeightingScheme::LogEntropy),
            other => Err(format!("unknown weighting `{other}` (expected tfidf | logentropy)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedMatrix {
    pub matrix: CsrMatrix,
    pub scheme: WeightingScheme,
    pub row_normalized: bool,
}

/// Global (per-term) weights fitted on one count matrix, reusable on others
/// over the same vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermWeights {
    pub scheme: WeightingScheme,
    pub normalize: bool,
    pub global: Vec<f64>,
}

impl TermWeights {
    pub fn fit(scheme: WeightingScheme, m: &DocTermMatrix, normalize: bool) -> Self {
        let global = match scheme {
            WeightingScheme::TfIdf => idf(m),
            WeightingScheme::LogEntropy => entropy_global(m),
        };
        TermWeights {
            scheme,
            normalize,
            global,
        }
    }

    pub fn apply(&self, m: &DocTermMatrix) -> Result<WeightedMatrix> {
        if m.cols() != self.global.len() {
            return Err(Error::DimensionMismatch {
                expected: self.global.len(),
                actual: m.cols(),
            });
        }
        let mut matrix = match self.scheme {
            WeightingScheme::TfIdf => m.counts.map_values(|c, tf| tf * self.global[c]),
            WeightingScheme::LogEntropy => m.counts.map_values(|c, tf| (1.0 + tf).log2() * self.global[c]),
        };
        if self.normalize {
            matrix.l2_normalize_rows();
        }
        Ok(WeightedMatrix {
            matrix,
            scheme: self.scheme,
            row_normalized: self.normalize,
        })
    }
}

fn idf(m: &DocTermMatrix) -> Vec<f64> {
    let n = m.rows() as f64;
    m.counts
        .column_totals()
        .into_iter()
        .map(|(_, df)| ((1.0 + n) / (1.0 + df as f64)).ln() + 1.0)
        .collect()
}

fn entropy_global(m: &DocTermMatrix) -> Vec<f64> {
    let denom = ((m.rows() + 1) as f64).log2();
    m.counts
        .to_columns()
        .into_par_iter()
        .map(|column| {
            // Sorting the counts makes the float sum independent of row order.
            let mut tfs: Vec<f64> = column.into_iter().map(|(_, v)| v).collect();
            tfs.sort_by(f64::total_cmp);
            let gf: f64 = tfs.iter().sum();
            if gf == 0.0 {
                return 1.0;
            }
            let plogp: f64 = tfs
                .iter()
                .map(|&tf| {
                    let p = tf / gf;
                    p * p.log2()
                })
                .sum();
            1.0 + plogp / denom
        })
        .collect()
}

pub fn weight_tfidf(m: &DocTermMatrix, normalize: bool) -> WeightedMatrix {
    TermWeights::fit(WeightingScheme::TfIdf, m, normalize)
        .apply(m)
        .expect("weights fitted on the same matrix")
}

pub fn weight_logentropy(m: &DocTermMatrix, normalize: bool) -> WeightedMatrix {
    TermWeights::fit(WeightingScheme::LogEntropy, m, normalize)
        .apply(m)
        .expect("weights fitted on the same matrix")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(words: &[&str]) -> Vec<String> {
        words.iter().map(|s| s.to_string()).collect()
    }

    /// Counts for the documents "a a b" / "a c" / "b b b c" over vocabulary [a, b, c].
    fn fixture() -> DocTermMatrix {
        let m = CsrMatrix::from_dense(&[vec![2.0, 1.0, 0.0], vec![1.0, 0.0, 1.0], vec![0.0, 3.0, 1.0]], 3).unwrap();
        DocTermMatrix::from_counts(m).unwrap()
    }

    fn assert_close(actual: &CsrMatrix, expected: &[[f64; 3]; 3]) {
        let dense = actual.to_dense();
        for (r, row) in expected.iter().enumerate() {
            for (c, &want) in row.iter().enumerate() {
                assert!(
                    (dense[r][c] - want).abs() < 1e-12,
                    "({r},{c}): {} vs {want}",
                    dense[r][c]
                );
            }
        }
    }

    #[test]
    fn tokenizer_examples() {
        let cfg = TokenizerConfig::default();
        assert!(tokenize("", &cfg).is_empty());
        assert_eq!(
            tokenize("Check overflow // TODO", &cfg),
            toks(&["check", "overflow", "todo"])
        );
        assert_eq!(
            tokenize("/* free the buffer */", &cfg),
            toks(&["free", "the", "buffer"])
        );
        assert_eq!(tokenize("a b cd x1 é_ok", &cfg), toks(&["cd", "x1", "ok"]));
        let stop = TokenizerConfig {
            stopwords: ["the".to_string()].into(),
            ..Default::default()
        };
        assert_eq!(tokenize("The buffer", &stop), toks(&["buffer"]));
    }

    #[test]
    fn vocabulary_examples() {
        let docs = vec![toks(&["a", "b"]), toks(&["b", "c"])];
        assert_eq!(build_vocabulary(&docs, 1).unwrap().terms(), &toks(&["a", "b", "c"])[..]);
        assert_eq!(build_vocabulary(&docs, 2).unwrap().terms(), &toks(&["b"])[..]);
        assert!(matches!(
            build_vocabulary(&[toks(&["a"])], 2),
            Err(Error::EmptyVocabulary { min_df: 2 })
        ));
    }

    #[test]
    fn vocabulary_json() {
        let v = build_vocabulary(&[toks(&["zeta", "alpha"])], 1).unwrap();
        let text = v.to_json().unwrap();
        assert!(text.contains("\"version\": 1"));
        let back = Vocabulary::from_json(&text).unwrap();
        assert_eq!(back, v);
        assert_eq!(back.index_of("zeta"), Some(1));
        assert!(Vocabulary::from_json(r#"{"version":1,"min_df":1,"terms":["b","a"]}"#).is_err());
        assert!(Vocabulary::from_json(r#"{"version":9,"min_df":1,"terms":["a"]}"#).is_err());
    }

    #[test]
    fn counting_examples() {
        let vocab = build_vocabulary(&[toks(&["a", "b"])], 1).unwrap();
        let m = count_matrix(&[toks(&["b", "b", "a"]), toks(&["z"]), vec![]], &vocab);
        assert_eq!(
            m.as_matrix().to_dense(),
            vec![vec![1.0, 2.0], vec![0.0, 0.0], vec![0.0, 0.0]]
        );
    }

    #[test]
    fn tfidf_term_in_every_document_has_unit_idf() {
        let m = DocTermMatrix::from_counts(CsrMatrix::from_dense(&[vec![3.0], vec![1.0]], 1).unwrap()).unwrap();
        assert_eq!(weight_tfidf(&m, false).matrix.to_dense(), vec![vec![3.0], vec![1.0]]);
    }

    #[test]
    fn tfidf_single_document_normalized() {
        let m = DocTermMatrix::from_counts(CsrMatrix::from_dense(&[vec![1.0, 2.0]], 2).unwrap()).unwrap();
        let w = weight_tfidf(&m, true).matrix.to_dense();
        let s5 = 5f64.sqrt();
        assert!((w[0][0] - 1.0 / s5).abs() < 1e-15);
        assert!((w[0][1] - 2.0 / s5).abs() < 1e-15);
    }

    // Expected values produced by evaluating the weighting formulas directly
    // in a standalone numpy script.
    #[test]
    fn tfidf_fixture() {
        let raw = [
            [2.5753641449035616, 1.2876820724517808, 0.0],
            [1.2876820724517808, 0.0, 1.2876820724517808],
            [0.0, 3.8630462173553424, 1.2876820724517808],
        ];
        let norm = [
            [0.8944271909999159, 0.4472135954999579, 0.0],
            [std::f64::consts::FRAC_1_SQRT_2, 0.0, std::f64::consts::FRAC_1_SQRT_2],
            [0.0, 0.9486832980505138, 0.31622776601683794],
        ];
        assert_close(&weight_tfidf(&fixture(), false).matrix, &raw);
        assert_close(&weight_tfidf(&fixture(), true).matrix, &norm);
    }

    #[test]
    fn logentropy_fixture() {
        let raw = [
            [0.8572302699487443, 0.5943609377704335, 0.0],
            [0.5408520829727552, 0.0, 0.5],
            [0.0, 1.188721875540867, 0.5],
        ];
        let norm = [
            [0.8217909698631437, 0.5697890854091482, 0.0],
            [0.7342944396530592, 0.0, 0.6788311099931997],
            [0.0, 0.9217779931681054, 0.3877181080514302],
        ];
        let fitted = TermWeights::fit(WeightingScheme::LogEntropy, &fixture(), false);
        let g = [0.5408520829727552, 0.5943609377704335, 0.5];
        for (a, b) in fitted.global.iter().zip(g) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_close(&weight_logentropy(&fixture(), false).matrix, &raw);
        assert_close(&weight_logentropy(&fixture(), true).matrix, &norm);
    }

    #[test]
    fn logentropy_special_cases() {
        // Single-document term: zero entropy, weight log2(1 + tf).
        let m = DocTermMatrix::from_counts(CsrMatrix::from_dense(&[vec![3.0], vec![0.0]], 1).unwrap()).unwrap();
        assert_eq!(weight_logentropy(&m, false).matrix.get(0, 0), 2.0);
        // tf = 1 in each of three documents.
        let m =
            DocTermMatrix::from_counts(CsrMatrix::from_dense(&[vec![1.0], vec![1.0], vec![1.0]], 1).unwrap()).unwrap();
        let g = TermWeights::fit(WeightingScheme::LogEntropy, &m, false).global[0];
        assert!((g - 0.20751874963942196).abs() < 1e-12);
    }

    #[test]
    fn apply_checks_width() {
        let w = TermWeights::fit(WeightingScheme::TfIdf, &fixture(), true);
        let narrow = DocTermMatrix::from_counts(CsrMatrix::zeros(1, 2)).unwrap();
        assert!(matches!(w.apply(&narrow), Err(Error::DimensionMismatch { .. })));
    }
}
