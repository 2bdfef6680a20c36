//! Per-phoneme real-vs-synthetic linear classifiers.

mod battery;
mod logistic;
mod svm;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use battery::{derive_seed, run_battery, BatteryConfig, CellData, PhonemeResult, ResultStatus};
pub use logistic::{logistic_objective, train_logistic, train_logistic_traced, LogisticOptions};
pub use svm::{train_svm, SvmOptions};

/// Minimum tokens per class for a phoneme to be analysed.
pub const DEFAULT_MIN_TOKENS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error("insufficient data: {real} real and {synthetic} synthetic samples (need {min} per class)")]
    InsufficientData { real: usize, synthetic: usize, min: usize },
    #[error("training set must contain both classes")]
    SingleClass,
    #[error("empty set")]
    Empty,
    #[error("dimension mismatch: model has {expected}, sample has {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("training loss became non-finite")]
    NonFiniteLoss,
    #[error("vectors and labels differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

pub type Result<T> = std::result::Result<T, ClassifyError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Real = 0,
    Synthetic = 1,
}

impl Label {
    pub fn flipped(self) -> Label {
        match self {
            Label::Real => Label::Synthetic,
            Label::Synthetic => Label::Real,
        }
    }

    fn as_f64(self) -> f64 {
        self as u8 as f64
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabeledSet {
    pub vectors: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
}

impl LabeledSet {
    pub fn new(vectors: Vec<Vec<f64>>, labels: Vec<Label>) -> Result<Self> {
        if vectors.len() != labels.len() {
            return Err(ClassifyError::LengthMismatch(vectors.len(), labels.len()));
        }
        Ok(Self { vectors, labels })
    }

    /// Real vectors labelled 0 followed by synthetic vectors labelled 1.
    pub fn from_classes(real: Vec<Vec<f64>>, synthetic: Vec<Vec<f64>>) -> Self {
        let mut labels = vec![Label::Real; real.len()];
        labels.extend(std::iter::repeat_n(Label::Synthetic, synthetic.len()));
        let mut vectors = real;
        vectors.extend(synthetic);
        Self { vectors, labels }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.first().map_or(0, Vec::len)
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    fn has_both_classes(&self) -> bool {
        self.count(Label::Real) > 0 && self.count(Label::Synthetic) > 0
    }

    fn subset(&self, idx: &[usize]) -> LabeledSet {
        LabeledSet {
            vectors: idx.iter().map(|&i| self.vectors[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub fn with_flipped_labels(&self) -> LabeledSet {
        LabeledSet {
            vectors: self.vectors.clone(),
            labels: self.labels.iter().map(|l| l.flipped()).collect(),
        }
    }
}

/// Per-class random split with `round(fraction * n_class)` test samples
/// from each class. Deterministic for a given seed; both halves keep the
/// original sample order. Each class is shuffled by a fresh stream from the
/// same seed, so equally sized classes share one permutation and tokens
/// paired by position stay on the same side of the split.
pub fn split_stratified(set: &LabeledSet, test_fraction: f64, seed: u64, min_per_class: usize) -> Result<(LabeledSet, LabeledSet)> {
    let real = set.count(Label::Real);
    let synthetic = set.count(Label::Synthetic);
    if real < min_per_class || synthetic < min_per_class || real == 0 || synthetic == 0 {
        return Err(ClassifyError::InsufficientData {
            real,
            synthetic,
            min: min_per_class,
        });
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [Label::Real, Label::Synthetic] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx: Vec<usize> = (0..set.len()).filter(|&i| set.labels[i] == class).collect();
        let n_test = (test_fraction * idx.len() as f64).round() as usize;
        idx.shuffle(&mut rng);
        test.extend_from_slice(&idx[..n_test]);
        train.extend_from_slice(&idx[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((set.subset(&train), set.subset(&test)))
}

/// Per-dimension z-scoring fitted on a training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Zero marks a constant dimension, which maps to 0.
    pub std: Vec<f64>,
}

impl Standardizer {
    const MIN_STD: f64 = 1e-12;

    pub fn fit(set: &LabeledSet) -> Result<Self> {
        if set.is_empty() {
            return Err(ClassifyError::Empty);
        }
        let n = set.len() as f64;
        let dim = set.dim();
        let mut mean = vec![0.0; dim];
        for v in &set.vectors {
            for (m, x) in mean.iter_mut().zip(v) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for v in &set.vectors {
            for ((s, x), m) in var.iter_mut().zip(v).zip(&mean) {
                *s += (x - m) * (x - m);
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd < Self::MIN_STD {
                    0.0
                } else {
                    sd
                }
            })
            .collect();
        Ok(Self { mean, std })
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| if *s == 0.0 { 0.0 } else { (v - m) / s })
            .collect()
    }

    pub fn transform_set(&self, set: &LabeledSet) -> LabeledSet {
        LabeledSet {
            vectors: set.vectors.iter().map(|v| self.transform(v)).collect(),
            labels: set.labels.clone(),
        }
    }
}

/// Z-scores both sets with statistics from `train`.
pub fn standardize(train: &LabeledSet, test: &LabeledSet) -> Result<(LabeledSet, LabeledSet, Standardizer)> {
    let s = Standardizer::fit(train)?;
    Ok((s.transform_set(train), s.transform_set(test), s))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    #[serde(rename = "lr")]
    Logistic,
    Svm,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 2] = [ClassifierKind::Logistic, ClassifierKind::Svm];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Logistic => "lr",
            ClassifierKind::Svm => "svm",
        }
    }
}

/// Linear decision function over standardized inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub kind: ClassifierKind,
    pub standardization: Standardizer,
}

impl LinearModel {
    /// `w . z(x) + b`, where `z` is the training standardization.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(ClassifyError::DimensionMismatch {
                expected: self.weights.len(),
                found: x.len(),
            });
        }
        let z = self.standardization.transform(x);
        Ok(self.weights.iter().zip(&z).map(|(w, v)| w * v).sum::<f64>() + self.bias)
    }

    /// Synthetic iff the score is strictly positive; ties go to real.
    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        Ok(if self.score(x)? > 0.0 {
            Label::Synthetic
        } else {
            Label::Real
        })
    }
}

/// Fraction of correctly predicted samples.
pub fn evaluate(model: &LinearModel, test: &LabeledSet) -> Result<f64> {
    if test.is_empty() {
        return Err(ClassifyError::Empty);
    }
    let mut correct = 0usize;
    for (x, &y) in test.vectors.iter().zip(&test.labels) {
        if model.predict(x)? == y {
            correct += 1;
        }
    }
    Ok(correct as f64 / test.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n_real: usize, n_synth: usize) -> LabeledSet {
        LabeledSet::from_classes(
            (0..n_real).map(|i| vec![i as f64, 1.0]).collect(),
            (0..n_synth).map(|i| vec![-(i as f64), 2.0]).collect(),
        )
    }

    #[test]
    fn split_sizes() {
        let (train, test) = split_stratified(&toy(50, 50), 0.2, 1, 10).unwrap();
        assert_eq!(test.count(Label::Real), 10);
        assert_eq!(test.count(Label::Synthetic), 10);
        assert_eq!(train.len(), 80);
        for v in &test.vectors {
            assert!(!train.vectors.contains(v));
        }
    }

    #[test]
    fn split_deterministic() {
        let a = split_stratified(&toy(30, 40), 0.2, 5, 10).unwrap();
        let b = split_stratified(&toy(30, 40), 0.2, 5, 10).unwrap();
        assert_eq!(a, b);
        let c = split_stratified(&toy(30, 40), 0.2, 6, 10).unwrap();
        assert_ne!(a.1, c.1);
    }

    #[test]
    fn split_rejects_small_class() {
        assert_eq!(
            split_stratified(&toy(5, 50), 0.2, 0, 10),
            Err(ClassifyError::InsufficientData {
                real: 5,
                synthetic: 50,
                min: 10
            })
        );
    }

    #[test]
    fn standardize_examples() {
        // column 0: values 3 and 7 -> mean 5, std 2; column 1 constant.
        let train = LabeledSet::from_classes(vec![vec![3.0, 4.0]], vec![vec![7.0, 4.0]]);
        let test = LabeledSet::from_classes(vec![vec![7.0, 9.0]], vec![]);
        let (tr, te, s) = standardize(&train, &test).unwrap();
        assert_eq!(s.mean, vec![5.0, 4.0]);
        assert_eq!(s.std, vec![2.0, 0.0]);
        assert_eq!(te.vectors[0], vec![1.0, 0.0]);
        assert_eq!(tr.vectors, vec![vec![-1.0, 0.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn standardize_idempotent() {
        let set = LabeledSet::from_classes(
            (0..20).map(|i| vec![(i * i) as f64 * 0.3, (i % 3) as f64]).collect(),
            vec![],
        );
        let (once, _, _) = standardize(&set, &set).unwrap();
        let (twice, _, s2) = standardize(&once, &once).unwrap();
        for m in &s2.mean {
            assert!(m.abs() < 1e-12);
        }
        for sd in &s2.std {
            assert!((sd - 1.0).abs() < 1e-12);
        }
        for (a, b) in once.vectors.iter().flatten().zip(twice.vectors.iter().flatten()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    fn fixed_model(w: Vec<f64>, b: f64) -> LinearModel {
        let dim = w.len();
        LinearModel {
            weights: w,
            bias: b,
            kind: ClassifierKind::Logistic,
            standardization: Standardizer {
                mean: vec![0.0; dim],
                std: vec![1.0; dim],
            },
        }
    }

    #[test]
    fn evaluate_counts() {
        let model = fixed_model(vec![1.0], 0.0);
        let xs: Vec<Vec<f64>> = (0..10).map(|i| vec![if i < 5 { -1.0 } else { 1.0 }]).collect();
        let right: Vec<Label> = (0..10).map(|i| if i < 5 { Label::Real } else { Label::Synthetic }).collect();
        let set = LabeledSet::new(xs.clone(), right.clone()).unwrap();
        assert_eq!(evaluate(&model, &set).unwrap(), 1.0);
        let wrong = LabeledSet::new(xs.clone(), right.iter().map(|l| l.flipped()).collect()).unwrap();
        assert_eq!(evaluate(&model, &wrong).unwrap(), 0.0);
        let mut partial = right.clone();
        for l in partial.iter_mut().take(3) {
            *l = l.flipped();
        }
        assert!((evaluate(&model, &LabeledSet::new(xs, partial).unwrap()).unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn ties_predict_real() {
        let model = fixed_model(vec![0.0], 0.0);
        assert_eq!(model.predict(&[3.0]).unwrap(), Label::Real);
    }

    #[test]
    fn evaluate_dimension_mismatch() {
        let model = fixed_model(vec![1.0, 2.0], 0.0);
        let set = LabeledSet::from_classes(vec![vec![1.0]], vec![]);
        assert!(matches!(evaluate(&model, &set), Err(ClassifyError::DimensionMismatch { .. })));
    }
}
