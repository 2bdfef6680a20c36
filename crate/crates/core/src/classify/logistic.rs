use serde::{Deserialize, Serialize};

use super::{ClassifierKind, ClassifyError, LabeledSet, LinearModel, Result, Standardizer};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticOptions {
    pub lambda: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for LogisticOptions {
    fn default() -> Self {
        Self {
            lambda: 1e-2,
            max_iter: 500,
            tol: 1e-6,
        }
    }
}

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

/// Mean log-loss plus `lambda * |w|^2 / 2` (bias unpenalized), with its
/// gradient with respect to `w` and `b`.
pub fn logistic_objective(set: &LabeledSet, weights: &[f64], bias: f64, lambda: f64) -> (f64, Vec<f64>, f64) {
    let n = set.len() as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    for (x, label) in set.vectors.iter().zip(&set.labels) {
        let y = label.as_f64();
        let z: f64 = weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + bias;
        loss += softplus(z) - y * z;
        let r = sigmoid(z) - y;
        for (g, v) in grad.iter_mut().zip(x) {
            *g += r * v;
        }
        grad_b += r;
    }
    let reg: f64 = weights.iter().map(|w| w * w).sum::<f64>();
    for (g, w) in grad.iter_mut().zip(weights) {
        *g = *g / n + lambda * w;
    }
    (loss / n + 0.5 * lambda * reg, grad, grad_b / n)
}

/// Trains L2-regularized logistic regression by full-batch gradient descent
/// with Armijo backtracking, returning the model and the loss after every
/// accepted step (first entry is the loss at zero).
pub fn train_logistic_traced(train: &LabeledSet, options: &LogisticOptions) -> Result<(LinearModel, Vec<f64>)> {
    if !train.has_both_classes() {
        return Err(ClassifyError::SingleClass);
    }
    let standardization = Standardizer::fit(train)?;
    let data = standardization.transform_set(train);
    let dim = data.dim();

    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let (mut loss, mut grad, mut grad_b) = logistic_objective(&data, &w, b, options.lambda);
    if !loss.is_finite() {
        return Err(ClassifyError::NonFiniteLoss);
    }
    let mut trace = vec![loss];
    let mut step = 1.0;

    for _ in 0..options.max_iter {
        let grad_sq: f64 = grad.iter().map(|g| g * g).sum::<f64>() + grad_b * grad_b;
        if grad_sq == 0.0 {
            break;
        }
        // Try a slightly longer step than last time, then backtrack.
        step *= 2.0;
        let accepted = loop {
            let w_new: Vec<f64> = w.iter().zip(&grad).map(|(wi, gi)| wi - step * gi).collect();
            let b_new = b - step * grad_b;
            let (l_new, g_new, gb_new) = logistic_objective(&data, &w_new, b_new, options.lambda);
            if !l_new.is_finite() {
                return Err(ClassifyError::NonFiniteLoss);
            }
            if l_new <= loss - 1e-4 * step * grad_sq {
                break Some((w_new, b_new, l_new, g_new, gb_new));
            }
            step *= 0.5;
            if step < 1e-12 {
                break None;
            }
        };
        let Some((w_new, b_new, l_new, g_new, gb_new)) = accepted else {
            break;
        };
        let decrease = loss - l_new;
        w = w_new;
        b = b_new;
        loss = l_new;
        grad = g_new;
        grad_b = gb_new;
        trace.push(loss);
        if decrease < options.tol {
            break;
        }
    }

    Ok((
        LinearModel {
            weights: w,
            bias: b,
            kind: ClassifierKind::Logistic,
            standardization,
        },
        trace,
    ))
}

pub fn train_logistic(train: &LabeledSet, options: &LogisticOptions) -> Result<LinearModel> {
    train_logistic_traced(train, options).map(|(m, _)| m)
}
