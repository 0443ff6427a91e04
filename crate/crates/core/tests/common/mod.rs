//! Independent reference implementations used by the integration tests.
//! Everything here works on dense `Vec<Vec<_>>` data and evaluates the
//! formulas directly, sharing no code with the library's sparse paths.

#![allow(dead_code)]

use commentrel::Label;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Dense = Vec<Vec<f64>>;

/// Random count matrix with `docs` rows and `terms` columns where every column
/// occurs in at least one document.
pub fn random_counts(rng: &mut ChaCha8Rng, docs: usize, terms: usize) -> Dense {
    let mut m: Dense = (0..docs)
        .map(|_| {
            (0..terms)
                .map(|_| {
                    if rng.gen_bool(0.45) {
                        rng.gen_range(1..6) as f64
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    for t in 0..terms {
        if m.iter().all(|row| row[t] == 0.0) {
            let d = rng.gen_range(0..docs);
            m[d][t] = rng.gen_range(1..4) as f64;
        }
    }
    m
}

pub fn random_labels(rng: &mut ChaCha8Rng, n: usize) -> Vec<Label> {
    assert!(n >= 2);
    loop {
        let labels: Vec<Label> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.5) {
                    Label::Useful
                } else {
                    Label::NotUseful
                }
            })
            .collect();
        if labels.contains(&Label::Useful) && labels.contains(&Label::NotUseful) {
            return labels;
        }
    }
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normalize(mut m: Dense) -> Dense {
    for row in &mut m {
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|v| *v /= norm);
        }
    }
    m
}

pub fn tfidf_oracle(counts: &Dense, normalize_rows: bool) -> Dense {
    let n = counts.len() as f64;
    let terms = counts[0].len();
    let mut out = vec![vec![0.0; terms]; counts.len()];
    for i in 0..terms {
        let df = counts.iter().filter(|row| row[i] > 0.0).count() as f64;
        let idf = ((1.0 + n) / (1.0 + df)).ln() + 1.0;
        for (j, row) in counts.iter().enumerate() {
            out[j][i] = row[i] * idf;
        }
    }
    if normalize_rows {
        normalize(out)
    } else {
        out
    }
}

pub fn logentropy_oracle(counts: &Dense, normalize_rows: bool) -> Dense {
    let n = counts.len() as f64;
    let terms = counts[0].len();
    let mut out = vec![vec![0.0; terms]; counts.len()];
    for i in 0..terms {
        let gf: f64 = counts.iter().map(|row| row[i]).sum();
        let mut entropy_sum = 0.0;
        for row in counts {
            if row[i] > 0.0 {
                let p = row[i] / gf;
                entropy_sum += p * p.log2();
            }
        }
        let global = 1.0 + entropy_sum / (n + 1.0).log2();
        for (j, row) in counts.iter().enumerate() {
            out[j][i] = (1.0 + row[i]).log2() * global;
        }
    }
    if normalize_rows {
        normalize(out)
    } else {
        out
    }
}

/// Chi-square over the 2-class table of summed feature values.
pub fn chi2_oracle(m: &Dense, labels: &[Label]) -> Vec<f64> {
    let n = labels.len() as f64;
    let terms = m[0].len();
    let classes = [Label::Useful, Label::NotUseful];
    (0..terms)
        .map(|i| {
            let total: f64 = m.iter().map(|row| row[i]).sum();
            if total == 0.0 {
                return 0.0;
            }
            classes
                .iter()
                .map(|&c| {
                    let n_c = labels.iter().filter(|&&l| l == c).count() as f64;
                    let observed: f64 = m
                        .iter()
                        .zip(labels)
                        .filter(|(_, &l)| l == c)
                        .map(|(row, _)| row[i])
                        .sum();
                    let expected = total * n_c / n;
                    (observed - expected).powi(2) / expected
                })
                .sum()
        })
        .collect()
}

/// Presence/class mutual information in bits, by enumerating the 2x2 table.
pub fn mi_oracle(m: &Dense, labels: &[Label]) -> Vec<f64> {
    let n = labels.len() as f64;
    let terms = m[0].len();
    (0..terms)
        .map(|i| {
            let mut mi = 0.0;
            for present in [false, true] {
                for class in [Label::Useful, Label::NotUseful] {
                    let n_uc = m
                        .iter()
                        .zip(labels)
                        .filter(|(row, &l)| (row[i] != 0.0) == present && l == class)
                        .count() as f64;
                    if n_uc == 0.0 {
                        continue;
                    }
                    let n_u = m.iter().filter(|row| (row[i] != 0.0) == present).count() as f64;
                    let n_c = labels.iter().filter(|&&l| l == class).count() as f64;
                    mi += (n_uc / n) * (n * n_uc / (n_u * n_c)).log2();
                }
            }
            mi
        })
        .collect()
}

pub fn max_abs_diff(a: &Dense, b: &Dense) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}
