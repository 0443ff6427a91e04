//! Linear soft-margin SVM with an unpenalized bias.
//!
//! For a fixed bias the problem is solved exactly in the dual by coordinate
//! descent. The optimal bias is then located by bracketed root finding on
//! `sum_i alpha_i y_i`, which is minus the derivative of the optimal primal
//! value with respect to the bias.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_training_data, positive, ModelParams, TrainedModel};
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::matrix::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kernel {
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmHyper {
    pub cost_c: f64,
    pub kernel: Kernel,
    /// Recorded for provenance only; a linear kernel has no gamma.
    pub gamma: Option<String>,
    /// Coordinate-descent epochs per inner solve.
    pub max_iters: usize,
    /// Projected-gradient gap at which an inner solve stops.
    pub tol: f64,
    pub seed: u64,
}

impl Default for SvmHyper {
    fn default() -> Self {
        SvmHyper {
            cost_c: 1.0,
            kernel: Kernel::Linear,
            gamma: None,
            max_iters: 1000,
            tol: 1e-9,
            seed: 0,
        }
    }
}

/// `0.5 ||w||^2 + C sum_j max(0, 1 - y_j (w.x_j + b))`.
pub fn svm_objective(x: &CsrMatrix, y: &[f64], weights: &[f64], bias: f64, cost_c: f64) -> f64 {
    let hinge: f64 = (0..x.rows())
        .map(|r| (1.0 - y[r] * (x.row_dot(r, weights) + bias)).max(0.0))
        .sum();
    0.5 * weights.iter().map(|w| w * w).sum::<f64>() + cost_c * hinge
}

struct DualSolver<'a> {
    x: &'a CsrMatrix,
    y: Vec<f64>,
    sq_norms: Vec<f64>,
    alpha: Vec<f64>,
    w: Vec<f64>,
    c: f64,
    order: Vec<usize>,
    rng: ChaCha8Rng,
    epochs: usize,
}

impl DualSolver<'_> {
    fn update(&mut self, i: usize, new_alpha: f64) {
        let delta = new_alpha - self.alpha[i];
        if delta != 0.0 {
            self.alpha[i] = new_alpha;
            let (idx, vals) = self.x.row(i);
            let scale = delta * self.y[i];
            for (&c, &v) in idx.iter().zip(vals) {
                self.w[c] += scale * v;
            }
        }
    }

    /// Minimizes `0.5 a'Qa - sum_i (1 - y_i b) a_i` over the box `[0, C]`.
    fn solve(&mut self, bias: f64, max_epochs: usize, tol: f64) {
        for _ in 0..max_epochs {
            self.epochs += 1;
            self.order.shuffle(&mut self.rng);
            let (mut pg_max, mut pg_min) = (f64::NEG_INFINITY, f64::INFINITY);
            for k in 0..self.order.len() {
                let i = self.order[k];
                let target = 1.0 - self.y[i] * bias;
                let grad = self.y[i] * self.x.row_dot(i, &self.w) - target;
                let a = self.alpha[i];
                let pg = if a <= 0.0 {
                    grad.min(0.0)
                } else if a >= self.c {
                    grad.max(0.0)
                } else {
                    grad
                };
                pg_max = pg_max.max(pg);
                pg_min = pg_min.min(pg);
                if pg == 0.0 {
                    continue;
                }
                let next = if self.sq_norms[i] > 0.0 {
                    (a - grad / self.sq_norms[i]).clamp(0.0, self.c)
                } else if target > 0.0 {
                    self.c
                } else {
                    0.0
                };
                self.update(i, next);
            }
            if pg_max - pg_min <= tol {
                break;
            }
        }
    }

    /// `sum_i alpha_i y_i`; positive means the bias should increase.
    fn balance(&self) -> f64 {
        let mut terms: Vec<f64> = self.alpha.iter().zip(&self.y).map(|(a, y)| a * y).collect();
        terms.sort_by(f64::total_cmp);
        terms.into_iter().sum()
    }
}

pub fn train_linear_svm(x: &CsrMatrix, y: &[Label], h: &SvmHyper) -> Result<TrainedModel> {
    check_training_data(x, y)?;
    if !positive(h.cost_c) || !positive(h.tol) {
        return Err(Error::InvalidConfig("cost_c and tol must be positive".into()));
    }
    let n = x.rows();
    let mut solver = DualSolver {
        x,
        y: y.iter().map(|l| l.sign()).collect(),
        sq_norms: (0..n).map(|r| x.row_norm(r).powi(2)).collect(),
        alpha: vec![0.0; n],
        w: vec![0.0; x.cols()],
        c: h.cost_c,
        order: (0..n).collect(),
        rng: ChaCha8Rng::seed_from_u64(h.seed),
        epochs: 0,
    };

    let probe = |solver: &mut DualSolver, b: f64| {
        solver.solve(b, h.max_iters, h.tol);
        solver.balance()
    };

    // Bracket the root of the balance, then bisect.
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    while probe(&mut solver, lo) < 0.0 && lo > -1e12 {
        hi = lo;
        lo *= 2.0;
    }
    while probe(&mut solver, hi) > 0.0 && hi < 1e12 {
        lo = hi;
        hi *= 2.0;
    }
    // Illinois-style regula falsi on the (non-increasing) balance.
    let mut f_lo = probe(&mut solver, lo);
    let mut f_hi = probe(&mut solver, hi);
    let mut bias = lo;
    let mut last_side = 0i8;
    for _ in 0..200 {
        if f_lo == 0.0 {
            bias = lo;
            break;
        }
        if f_hi == 0.0 {
            bias = hi;
            break;
        }
        bias = if f_lo > f_hi {
            (lo * f_hi - hi * f_lo) / (f_hi - f_lo)
        } else {
            0.5 * (lo + hi)
        };
        if !(bias > lo && bias < hi) {
            bias = 0.5 * (lo + hi);
        }
        if bias <= lo || bias >= hi || hi - lo <= 1e-12 * hi.abs().max(lo.abs()).max(1.0) {
            break;
        }
        let balance = probe(&mut solver, bias);
        if balance > 0.0 {
            lo = bias;
            f_lo = balance;
            if last_side == 1 {
                f_hi *= 0.5;
            }
            last_side = 1;
        } else if balance < 0.0 {
            hi = bias;
            f_hi = balance;
            if last_side == -1 {
                f_lo *= 0.5;
            }
            last_side = -1;
        } else {
            break;
        }
    }
    solver.solve(bias, h.max_iters, h.tol);

    let objective = svm_objective(x, &solver.y, &solver.w, bias, h.cost_c);
    Ok(TrainedModel::new(
        x.cols(),
        ModelParams::LinearSvm {
            hyper: h.clone(),
            epochs: solver.epochs,
            weights: solver.w,
            bias,
            objective,
        },
    ))
}
