use serde::{Deserialize, Serialize};

use super::{check_training_data, positive, ModelParams, TrainedModel};
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::matrix::CsrMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegHyper {
    /// Weight of the `0.5 * ||w||^2` penalty relative to the summed log-loss.
    pub l2_strength: f64,
    pub max_iters: usize,
    /// Stop once `||grad|| <= tol * max(1, ||grad_0||)`.
    pub tol: f64,
    pub seed: u64,
}

impl Default for LogRegHyper {
    fn default() -> Self {
        LogRegHyper {
            l2_strength: 1.0,
            max_iters: 1000,
            tol: 1e-6,
            seed: 0,
        }
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `sum_j ln(1 + exp(-y_j (w.x_j + b))) + l2/2 ||w||^2`; the bias is not penalized.
pub fn logistic_objective(x: &CsrMatrix, y: &[f64], weights: &[f64], bias: f64, l2: f64) -> f64 {
    let loss: f64 = (0..x.rows())
        .map(|r| softplus(-y[r] * (x.row_dot(r, weights) + bias)))
        .sum();
    loss + 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>()
}

/// Gradient of [`logistic_objective`]; the last element is the bias component.
pub fn logistic_gradient(x: &CsrMatrix, y: &[f64], weights: &[f64], bias: f64, l2: f64) -> Vec<f64> {
    let d = weights.len();
    let mut grad: Vec<f64> = weights.iter().map(|w| l2 * w).collect();
    grad.push(0.0);
    for (r, &yr) in y.iter().enumerate() {
        let margin = yr * (x.row_dot(r, weights) + bias);
        let coef = -yr * sigmoid(-margin);
        let (idx, vals) = x.row(r);
        for (&c, &v) in idx.iter().zip(vals) {
            grad[c] += coef * v;
        }
        grad[d] += coef;
    }
    grad
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub fn train_logreg(x: &CsrMatrix, y: &[Label], h: &LogRegHyper) -> Result<TrainedModel> {
    train_logreg_traced(x, y, h).map(|(m, _)| m)
}

/// Full-batch gradient descent with Barzilai-Borwein trial steps and Armijo
/// backtracking. Returns the model and the objective after every iteration
/// (first entry is the starting objective).
pub fn train_logreg_traced(x: &CsrMatrix, y: &[Label], h: &LogRegHyper) -> Result<(TrainedModel, Vec<f64>)> {
    check_training_data(x, y)?;
    if !positive(h.l2_strength) || !positive(h.tol) {
        return Err(Error::InvalidConfig("l2_strength and tol must be positive".into()));
    }
    let d = x.cols();
    let ys: Vec<f64> = y.iter().map(|l| l.sign()).collect();
    let l2 = h.l2_strength;

    // theta = [w..., b]
    let mut theta = vec![0.0; d + 1];
    let objective = |t: &[f64]| logistic_objective(x, &ys, &t[..d], t[d], l2);
    let gradient = |t: &[f64]| logistic_gradient(x, &ys, &t[..d], t[d], l2);

    let mut f = objective(&theta);
    let mut g = gradient(&theta);
    let stop = h.tol * norm(&g).max(1.0);
    let mut trace = vec![f];
    let mut step = 1.0;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut iterations = 0;

    while iterations < h.max_iters && norm(&g) > stop {
        if let Some((pt, pg)) = &prev {
            let s: Vec<f64> = theta.iter().zip(pt).map(|(a, b)| a - b).collect();
            let yv: Vec<f64> = g.iter().zip(pg).map(|(a, b)| a - b).collect();
            let sy: f64 = s.iter().zip(&yv).map(|(a, b)| a * b).sum();
            let ss: f64 = s.iter().map(|a| a * a).sum();
            if sy > 0.0 && ss > 0.0 {
                step = ss / sy;
            }
        }
        let gg: f64 = g.iter().map(|a| a * a).sum();
        let (candidate, f_new) = loop {
            let cand: Vec<f64> = theta.iter().zip(&g).map(|(t, gi)| t - step * gi).collect();
            let f_cand = objective(&cand);
            if f_cand <= f - 1e-4 * step * gg || step < 1e-16 {
                break (cand, f_cand);
            }
            step *= 0.5;
        };
        if f_new > f {
            // Line search bottomed out; no further progress is possible in floating point.
            break;
        }
        prev = Some((std::mem::replace(&mut theta, candidate), g));
        f = f_new;
        g = gradient(&theta);
        trace.push(f);
        iterations += 1;
    }

    let bias = theta.pop().unwrap_or(0.0);
    let model = TrainedModel::new(
        d,
        ModelParams::LogReg {
            hyper: h.clone(),
            weights: theta,
            bias,
            iterations,
            objective: f,
        },
    );
    Ok((model, trace))
}
