use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ClassifierKind, ClassifyError, Label, LabeledSet, LinearModel, Result, Standardizer};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmOptions {
    pub lambda: f64,
    /// Passes over the training set.
    pub epochs: usize,
    /// Fraction of final steps whose iterates are averaged.
    pub average_fraction: f64,
}

impl Default for SvmOptions {
    fn default() -> Self {
        Self {
            lambda: 1e-2,
            epochs: 1000,
            average_fraction: 0.1,
        }
    }
}

/// Linear SVM by stochastic subgradient descent on the regularized hinge
/// loss (Pegasos), step `1 / (lambda * t)`.
///
/// The bias is learned as the weight of a constant feature and shares the
/// penalty. Each epoch visits the samples in a fresh seeded order. The
/// returned parameters are the mean of the iterates over the final
/// `average_fraction` of steps.
pub fn train_svm(train: &LabeledSet, options: &SvmOptions, seed: u64) -> Result<LinearModel> {
    if !train.has_both_classes() {
        return Err(ClassifyError::SingleClass);
    }
    let standardization = Standardizer::fit(train)?;
    let data = standardization.transform_set(train);
    let dim = data.dim();
    let n = data.len();
    let signs: Vec<f64> = data
        .labels
        .iter()
        .map(|l| if *l == Label::Synthetic { 1.0 } else { -1.0 })
        .collect();

    let total_steps = options.epochs.max(1) * n;
    let avg_steps = ((total_steps as f64 * options.average_fraction).ceil() as usize).clamp(1, total_steps);
    let avg_start = total_steps - avg_steps;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    // Weights with the bias as the last component.
    let mut w = vec![0.0; dim + 1];
    let mut avg = vec![0.0; dim + 1];
    let mut t = 0usize;
    for _ in 0..options.epochs.max(1) {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (options.lambda * t as f64);
            let x = &data.vectors[i];
            let y = signs[i];
            let margin = y * (w[..dim].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + w[dim]);
            let decay = 1.0 - eta * options.lambda;
            w.iter_mut().for_each(|v| *v *= decay);
            if margin < 1.0 {
                for (wi, xi) in w[..dim].iter_mut().zip(x) {
                    *wi += eta * y * xi;
                }
                w[dim] += eta * y;
            }
            if t > avg_start {
                for (a, v) in avg.iter_mut().zip(&w) {
                    *a += v;
                }
            }
        }
    }
    avg.iter_mut().for_each(|a| *a /= avg_steps as f64);
    if avg.iter().any(|v| !v.is_finite()) {
        return Err(ClassifyError::NonFiniteLoss);
    }
    let bias = avg.pop().unwrap_or(0.0);
    Ok(LinearModel {
        weights: avg,
        bias,
        kind: ClassifierKind::Svm,
        standardization,
    })
}
