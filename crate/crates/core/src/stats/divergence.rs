use serde::Serialize;

use super::gaussian::{Covariance, GaussianSummary};
use super::linalg::{cholesky, forward_substitute, log_det_from_cholesky, trace_inv_product};
use super::{Result, StatsError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KldResult {
    /// `KL(P || Q)`.
    pub d_rs: f64,
    /// `KL(Q || P)`.
    pub d_sr: f64,
    pub d_sym: f64,
}

/// Closed-form `KL(P || Q)` between two Gaussians:
///
/// `0.5 * [tr(Sq^-1 Sp) + (mq - mp)' Sq^-1 (mq - mp) - D + ln(det Sq / det Sp)]`
///
/// Both covariances are Cholesky-factored; no inverse is formed. Tiny
/// negative results from rounding are clamped to zero.
pub fn kld_gaussian(p: &GaussianSummary, q: &GaussianSummary) -> Result<f64> {
    let dim = p.dim();
    if q.dim() != dim {
        return Err(StatsError::DimensionMismatch(dim, q.dim()));
    }
    let diff: Vec<f64> = q.mean.iter().zip(&p.mean).map(|(a, b)| a - b).collect();

    let raw = match (&p.covariance, &q.covariance) {
        (Covariance::Diagonal(vp), Covariance::Diagonal(vq)) => {
            if vp.iter().chain(vq).any(|v| *v <= 0.0 || !v.is_finite()) {
                return Err(StatsError::IllConditioned);
            }
            let mut trace = 0.0;
            let mut maha = 0.0;
            let mut log_det = 0.0;
            for ((sp, sq), d) in vp.iter().zip(vq).zip(&diff) {
                trace += sp / sq;
                maha += d * d / sq;
                log_det += sq.ln() - sp.ln();
            }
            0.5 * (trace + maha - dim as f64 + log_det)
        }
        _ => {
            let l_p = cholesky(&p.covariance.to_dense(dim), dim).ok_or(StatsError::IllConditioned)?;
            let l_q = cholesky(&q.covariance.to_dense(dim), dim).ok_or(StatsError::IllConditioned)?;
            let trace = trace_inv_product(&l_q, &l_p, dim);
            let mut z = diff;
            forward_substitute(&l_q, dim, &mut z);
            let maha: f64 = z.iter().map(|v| v * v).sum();
            let log_det = log_det_from_cholesky(&l_q, dim) - log_det_from_cholesky(&l_p, dim);
            0.5 * (trace + maha - dim as f64 + log_det)
        }
    };
    if !raw.is_finite() {
        return Err(StatsError::IllConditioned);
    }
    Ok(raw.max(0.0))
}

/// Both directed divergences and their average.
pub fn symmetric_kld(p: &GaussianSummary, q: &GaussianSummary) -> Result<KldResult> {
    let d_rs = kld_gaussian(p, q)?;
    let d_sr = kld_gaussian(q, p)?;
    Ok(KldResult {
        d_rs,
        d_sr,
        d_sym: 0.5 * (d_rs + d_sr),
    })
}
