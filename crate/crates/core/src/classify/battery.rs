use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::logistic::{train_logistic, LogisticOptions};
use super::svm::{train_svm, SvmOptions};
use super::{evaluate, split_stratified, ClassifierKind, LabeledSet, DEFAULT_MIN_TOKENS};
use crate::features::PhonemeVector;
use crate::corpus::Role;
use crate::stats::{fit_gaussian, symmetric_kld, FitOptions, ModePolicy};
use crate::textgrid::{Category, Phoneme};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BatteryConfig {
    pub seed: u64,
    pub test_fraction: f64,
    pub min_tokens: usize,
    pub logistic: LogisticOptions,
    pub svm: SvmOptions,
    pub gaussian: FitOptions,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            test_fraction: 0.2,
            min_tokens: DEFAULT_MIN_TOKENS,
            logistic: LogisticOptions::default(),
            svm: SvmOptions::default(),
            gaussian: FitOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResultStatus {
    Ok,
    InsufficientData,
    /// Enough tokens, but fitting or training failed numerically.
    Failed,
}

impl ResultStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ResultStatus::Ok => "ok",
            ResultStatus::InsufficientData => "insufficient_data",
            ResultStatus::Failed => "failed",
        }
    }
}

impl fmt::Display for ResultStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome for one (phoneme, system, feature) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhonemeResult {
    pub phoneme: Phoneme,
    pub system: String,
    pub feature: String,
    pub n_real: usize,
    pub n_synth: usize,
    pub d_sym: Option<f64>,
    pub lr_acc: Option<f64>,
    pub svm_acc: Option<f64>,
    pub status: ResultStatus,
}

impl PhonemeResult {
    pub fn category(&self) -> Category {
        self.phoneme.category()
    }

    pub fn is_ok(&self) -> bool {
        self.status == ResultStatus::Ok
    }

    pub fn accuracy(&self, kind: ClassifierKind) -> Option<f64> {
        match kind {
            ClassifierKind::Logistic => self.lr_acc,
            ClassifierKind::Svm => self.svm_acc,
        }
    }
}

/// Pooled vectors of one synthetic system and one feature, grouped by
/// phoneme. `real` holds only the real utterances paired with the system.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CellData {
    pub system: String,
    pub feature: String,
    pub real: BTreeMap<Phoneme, Vec<Vec<f64>>>,
    pub synthetic: BTreeMap<Phoneme, Vec<Vec<f64>>>,
}

impl CellData {
    pub fn new(system: impl Into<String>, feature: impl Into<String>) -> Self {
        Self {
            system: system.into(),
            feature: feature.into(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, role: Role, phoneme: Phoneme, vector: Vec<f64>) {
        let map = match role {
            Role::Real => &mut self.real,
            Role::Synthetic => &mut self.synthetic,
        };
        map.entry(phoneme).or_default().push(vector);
    }

    pub fn extend_from(&mut self, vectors: &[PhonemeVector]) {
        for v in vectors {
            self.push(v.source.role, v.phoneme, v.vector.clone());
        }
    }
}

/// Stable 64-bit seed for a battery cell, independent of scheduling.
pub fn derive_seed(run_seed: u64, phoneme: Phoneme, system: &str, feature: &str, tag: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(run_seed.to_le_bytes());
    for part in [phoneme.as_str(), system, feature, tag] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part.as_bytes());
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

fn run_cell(cell: &CellData, phoneme: Phoneme, config: &BatteryConfig) -> PhonemeResult {
    let empty = Vec::new();
    let real = cell.real.get(&phoneme).unwrap_or(&empty);
    let synth = cell.synthetic.get(&phoneme).unwrap_or(&empty);
    let mut result = PhonemeResult {
        phoneme,
        system: cell.system.clone(),
        feature: cell.feature.clone(),
        n_real: real.len(),
        n_synth: synth.len(),
        d_sym: None,
        lr_acc: None,
        svm_acc: None,
        status: ResultStatus::InsufficientData,
    };
    if real.len().min(synth.len()) < config.min_tokens.max(2) {
        return result;
    }
    let fail = |mut r: PhonemeResult, what: &str, err: String| {
        log::warn!("{} / {} / {}: {what} failed: {err}", r.system, r.feature, r.phoneme);
        r.status = ResultStatus::Failed;
        r
    };

    // Both populations share one covariance structure so the divergence
    // compares like with like.
    let dim = real[0].len();
    let mode_options = FitOptions {
        policy: match config.gaussian.policy.resolve(real.len().min(synth.len()), dim) {
            crate::stats::CovarianceMode::Full => ModePolicy::Full,
            crate::stats::CovarianceMode::Diagonal => ModePolicy::Diagonal,
        },
        ..config.gaussian
    };
    let kld = fit_gaussian(real, &mode_options)
        .and_then(|gr| fit_gaussian(synth, &mode_options).map(|gs| (gr, gs)))
        .and_then(|(gr, gs)| symmetric_kld(&gr, &gs));
    match kld {
        Ok(k) => result.d_sym = Some(k.d_sym),
        Err(e) => return fail(result, "divergence", e.to_string()),
    }

    let set = LabeledSet::from_classes(real.clone(), synth.clone());
    let split_seed = derive_seed(config.seed, phoneme, &cell.system, &cell.feature, "split");
    let (train, test) = match split_stratified(&set, config.test_fraction, split_seed, config.min_tokens) {
        Ok(s) => s,
        Err(e) => return fail(result, "split", e.to_string()),
    };

    let lr = train_logistic(&train, &config.logistic).and_then(|m| evaluate(&m, &test));
    match lr {
        Ok(acc) => result.lr_acc = Some(acc),
        Err(e) => return fail(result, "logistic regression", e.to_string()),
    }
    let svm_seed = derive_seed(config.seed, phoneme, &cell.system, &cell.feature, ClassifierKind::Svm.as_str());
    let svm = train_svm(&train, &config.svm, svm_seed).and_then(|m| evaluate(&m, &test));
    match svm {
        Ok(acc) => result.svm_acc = Some(acc),
        Err(e) => return fail(result, "svm", e.to_string()),
    }
    result.status = ResultStatus::Ok;
    result
}

/// Runs divergence plus both classifiers for all 39 phonemes of every cell.
///
/// Results come back ordered by cell, then phoneme. Work is spread over the
/// current rayon pool; every cell has its own derived seed so the output
/// does not depend on scheduling.
pub fn run_battery(cells: &[CellData], config: &BatteryConfig) -> Vec<PhonemeResult> {
    let jobs: Vec<(&CellData, Phoneme)> = cells
        .iter()
        .flat_map(|c| Phoneme::ALL.into_iter().map(move |p| (c, p)))
        .collect();
    jobs.par_iter()
        .map(|(cell, phoneme)| run_cell(cell, *phoneme, config))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn quick_config() -> BatteryConfig {
        BatteryConfig {
            svm: SvmOptions {
                epochs: 100,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    fn normal(rng: &mut ChaCha8Rng) -> f64 {
        let u1: f64 = rng.random::<f64>().max(1e-300);
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    fn cell_with_shifts(shift: impl Fn(Phoneme) -> f64, per_class: usize, seed: u64) -> CellData {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cell = CellData::new("toy", "external:toy");
        for p in Phoneme::ALL {
            for _ in 0..per_class {
                let base = vec![normal(&mut rng), normal(&mut rng), normal(&mut rng)];
                cell.push(Role::Real, p, base);
                let mut v = vec![normal(&mut rng), normal(&mut rng), normal(&mut rng)];
                v[0] += shift(p);
                cell.push(Role::Synthetic, p, v);
            }
        }
        cell
    }

    #[test]
    fn full_inventory_gives_39_results() {
        let cell = cell_with_shifts(|_| 1.0, 20, 1);
        let results = run_battery(&[cell], &quick_config());
        assert_eq!(results.len(), 39);
        assert!(results.iter().all(|r| r.is_ok() && r.lr_acc.is_some() && r.svm_acc.is_some()));
        let order: Vec<Phoneme> = results.iter().map(|r| r.phoneme).collect();
        assert_eq!(order, Phoneme::ALL.to_vec());
    }

    #[test]
    fn same_distribution_is_indistinguishable() {
        let cell = cell_with_shifts(|_| 0.0, 60, 5);
        let results = run_battery(&[cell], &quick_config());
        let mean_lr: f64 = results.iter().map(|r| r.lr_acc.unwrap()).sum::<f64>() / 39.0;
        let mean_svm: f64 = results.iter().map(|r| r.svm_acc.unwrap()).sum::<f64>() / 39.0;
        assert!((mean_lr - 0.5).abs() < 0.05, "{mean_lr}");
        assert!((mean_svm - 0.5).abs() < 0.05, "{mean_svm}");
        for r in &results {
            assert!(r.d_sym.unwrap() < 0.5);
        }
    }

    #[test]
    fn identical_vectors_have_zero_divergence() {
        let mut cell = CellData::new("same", "lfcc");
        for i in 0..30 {
            let v = vec![(i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()];
            cell.push(Role::Real, Phoneme::IY, v.clone());
            cell.push(Role::Synthetic, Phoneme::IY, v);
        }
        let results = run_battery(&[cell], &quick_config());
        let iy = results.iter().find(|r| r.phoneme == Phoneme::IY).unwrap();
        assert!(iy.d_sym.unwrap().abs() < 1e-9);
        assert_eq!(iy.lr_acc, Some(0.5));
        assert_eq!(iy.svm_acc, Some(0.5));
    }

    #[test]
    fn insufficient_tokens_flagged() {
        let mut cell = CellData::new("s", "f");
        for i in 0..9 {
            cell.push(Role::Real, Phoneme::AA, vec![i as f64]);
            cell.push(Role::Synthetic, Phoneme::AA, vec![i as f64 + 1.0]);
        }
        let results = run_battery(&[cell], &quick_config());
        let aa = &results[0];
        assert_eq!(aa.phoneme, Phoneme::AA);
        assert_eq!(aa.status, ResultStatus::InsufficientData);
        assert_eq!((aa.n_real, aa.n_synth), (9, 9));
        assert_eq!(aa.lr_acc, None);
        assert!(results.iter().all(|r| r.status == ResultStatus::InsufficientData));
    }

    #[test]
    fn divergence_grows_with_shift() {
        let shifts = [(Phoneme::AA, 0.0), (Phoneme::AE, 1.0), (Phoneme::AH, 2.0), (Phoneme::AO, 4.0)];
        let cell = cell_with_shifts(
            |p| shifts.iter().find(|(q, _)| *q == p).map_or(0.0, |s| s.1),
            200,
            8,
        );
        let results = run_battery(&[cell], &quick_config());
        let picked: Vec<&PhonemeResult> = shifts
            .iter()
            .map(|(p, _)| results.iter().find(|r| r.phoneme == *p).unwrap())
            .collect();
        for w in picked.windows(2) {
            assert!(w[1].d_sym.unwrap() > w[0].d_sym.unwrap());
            assert!(w[1].lr_acc.unwrap() >= w[0].lr_acc.unwrap());
        }
    }

    #[test]
    fn independent_of_thread_count() {
        let cell = cell_with_shifts(|p| (p as usize % 5) as f64 * 0.5, 15, 2);
        let cells = [cell];
        let config = quick_config();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(6).build().unwrap();
        let a = one.install(|| run_battery(&cells, &config));
        let b = many.install(|| run_battery(&cells, &config));
        assert_eq!(a, b);
    }

    #[test]
    fn seeds_are_stable_and_distinct() {
        let a = derive_seed(0, Phoneme::AA, "melotts", "lfcc", "svm");
        assert_eq!(a, derive_seed(0, Phoneme::AA, "melotts", "lfcc", "svm"));
        assert_ne!(a, derive_seed(0, Phoneme::AA, "melotts", "lfcc", "split"));
        assert_ne!(a, derive_seed(1, Phoneme::AA, "melotts", "lfcc", "svm"));
        assert_ne!(a, derive_seed(0, Phoneme::AE, "melotts", "lfcc", "svm"));
    }
}
