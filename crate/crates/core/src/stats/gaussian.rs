use serde::{Deserialize, Serialize};

use super::{Result, StatsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovarianceMode {
    Full,
    Diagonal,
}

/// How [`fit_gaussian`] chooses the covariance structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModePolicy {
    /// Full covariance unless `n < 2 * D`, in which case diagonal.
    Auto,
    Full,
    Diagonal,
}

impl ModePolicy {
    pub fn resolve(self, n_samples: usize, dim: usize) -> CovarianceMode {
        match self {
            ModePolicy::Full => CovarianceMode::Full,
            ModePolicy::Diagonal => CovarianceMode::Diagonal,
            ModePolicy::Auto if n_samples < 2 * dim => CovarianceMode::Diagonal,
            ModePolicy::Auto => CovarianceMode::Full,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub policy: ModePolicy,
    /// Weight of the scaled-identity target: `(1 - a) S + a (tr S / D) I`.
    pub shrinkage: f64,
    /// Added to the diagonal after shrinkage.
    pub ridge: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            policy: ModePolicy::Auto,
            shrinkage: 0.05,
            ridge: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Covariance {
    /// Row-major `D x D`.
    Full(Vec<f64>),
    Diagonal(Vec<f64>),
}

impl Covariance {
    pub fn mode(&self) -> CovarianceMode {
        match self {
            Covariance::Full(_) => CovarianceMode::Full,
            Covariance::Diagonal(_) => CovarianceMode::Diagonal,
        }
    }

    /// Dense row-major copy.
    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        match self {
            Covariance::Full(m) => m.clone(),
            Covariance::Diagonal(d) => {
                let mut m = vec![0.0; dim * dim];
                for (i, v) in d.iter().enumerate() {
                    m[i * dim + i] = *v;
                }
                m
            }
        }
    }

    pub fn get(&self, i: usize, j: usize, dim: usize) -> f64 {
        match self {
            Covariance::Full(m) => m[i * dim + j],
            Covariance::Diagonal(d) if i == j => d[i],
            Covariance::Diagonal(_) => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSummary {
    pub mean: Vec<f64>,
    pub covariance: Covariance,
    pub n_samples: usize,
}

impl GaussianSummary {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mode(&self) -> CovarianceMode {
        self.covariance.mode()
    }

    /// Builds a summary from known parameters; `covariance` must be SPD.
    pub fn from_parts(mean: Vec<f64>, covariance: Covariance, n_samples: usize) -> Self {
        Self {
            mean,
            covariance,
            n_samples,
        }
    }
}

/// Fits a Gaussian with the unbiased (n - 1) covariance, then applies
/// shrinkage toward a scaled identity and a small ridge.
pub fn fit_gaussian<S: AsRef<[f64]>>(samples: &[S], options: &FitOptions) -> Result<GaussianSummary> {
    let n = samples.len();
    if n < 2 {
        return Err(StatsError::TooFewSamples { needed: 2, got: n });
    }
    let dim = samples[0].as_ref().len();
    for s in samples {
        let s = s.as_ref();
        if s.len() != dim {
            return Err(StatsError::DimensionMismatch(dim, s.len()));
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite);
        }
    }

    let mut mean = vec![0.0; dim];
    for s in samples {
        for (m, v) in mean.iter_mut().zip(s.as_ref()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let mode = options.policy.resolve(n, dim);
    if mode == CovarianceMode::Diagonal && options.policy == ModePolicy::Auto {
        log::debug!("covariance fallback to diagonal: n = {n} < 2 * D = {}", 2 * dim);
    }
    let denom = (n - 1) as f64;
    let alpha = options.shrinkage;

    let covariance = match mode {
        CovarianceMode::Diagonal => {
            let mut var = vec![0.0; dim];
            for s in samples {
                for ((acc, v), m) in var.iter_mut().zip(s.as_ref()).zip(&mean) {
                    let d = v - m;
                    *acc += d * d;
                }
            }
            var.iter_mut().for_each(|v| *v /= denom);
            let avg = var.iter().sum::<f64>() / dim as f64;
            var.iter_mut()
                .for_each(|v| *v = (1.0 - alpha) * *v + alpha * avg + options.ridge);
            Covariance::Diagonal(var)
        }
        CovarianceMode::Full => {
            let mut cov = vec![0.0; dim * dim];
            let mut centered = vec![0.0; dim];
            for s in samples {
                for ((c, v), m) in centered.iter_mut().zip(s.as_ref()).zip(&mean) {
                    *c = v - m;
                }
                for i in 0..dim {
                    let ci = centered[i];
                    let row = &mut cov[i * dim..(i + 1) * dim];
                    for j in i..dim {
                        row[j] += ci * centered[j];
                    }
                }
            }
            for i in 0..dim {
                for j in i..dim {
                    let v = cov[i * dim + j] / denom;
                    cov[i * dim + j] = v;
                    cov[j * dim + i] = v;
                }
            }
            let avg = (0..dim).map(|i| cov[i * dim + i]).sum::<f64>() / dim as f64;
            cov.iter_mut().for_each(|v| *v *= 1.0 - alpha);
            for i in 0..dim {
                cov[i * dim + i] += alpha * avg + options.ridge;
            }
            Covariance::Full(cov)
        }
    };

    Ok(GaussianSummary {
        mean,
        covariance,
        n_samples: n,
    })
}
