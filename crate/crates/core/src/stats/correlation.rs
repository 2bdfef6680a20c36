use std::collections::BTreeMap;

use serde::Serialize;

use super::special::student_t_two_tailed;
use super::{Result, StatsError};
use crate::textgrid::{Category, Phoneme};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub r: f64,
    /// Two-tailed p under `r = 0` with `n - 2` degrees of freedom.
    pub p: f64,
    pub n: usize,
}

const PERFECT_TOLERANCE: f64 = 1e-13;

/// Pearson correlation with its two-tailed Student-t p-value.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<CorrelationResult> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ys.len()));
    }
    let n = xs.len();
    if n < 3 {
        return Err(StatsError::TooFewSamples { needed: 3, got: n });
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 {
        return Err(StatsError::ZeroVariance("xs"));
    }
    if syy == 0.0 {
        return Err(StatsError::ZeroVariance("ys"));
    }
    let mut r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    // Exact linear relations can land a few ulps short of 1.
    if 1.0 - r.abs() < PERFECT_TOLERANCE {
        r = r.signum();
    }
    let p = if r.abs() == 1.0 {
        0.0
    } else {
        let df = (n - 2) as f64;
        let t = r * df.sqrt() / (1.0 - r * r).sqrt();
        student_t_two_tailed(t, df)
    };
    Ok(CorrelationResult { r, p, n })
}

/// Scientific notation with three significant digits; values below 1e-12
/// print as `<1e-12`.
pub fn format_p_value(p: f64) -> String {
    if p < 1e-12 {
        "<1e-12".to_string()
    } else {
        format!("{p:.2e}")
    }
}

/// Unweighted mean of the defined (finite) values of one category.
pub fn category_average(per_phoneme: &BTreeMap<Phoneme, f64>, category: Category) -> Result<f64> {
    let values: Vec<f64> = per_phoneme
        .iter()
        .filter(|(p, v)| p.category() == category && v.is_finite())
        .map(|(_, v)| *v)
        .collect();
    if values.is_empty() {
        return Err(StatsError::EmptyCategory(category.to_string()));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_point_example() {
        let c = pearson(&[1.0, 2.0, 3.0, 4.0], &[2.0, 1.0, 4.0, 3.0]).unwrap();
        assert!((c.r - 0.6).abs() < 1e-12);
        // df = 2 closed form: 1 - t / sqrt(2 + t^2), t = 0.6 * sqrt(2) / 0.8
        let t: f64 = 0.6 * 2f64.sqrt() / 0.8;
        assert!((c.p - (1.0 - t / (2.0 + t * t).sqrt())).abs() < 1e-12);
        assert!((c.p - 0.40).abs() < 0.005);
    }

    #[test]
    fn affine_relations_are_perfect() {
        let xs = [0.5, 1.0, 4.0, 2.0, 9.0];
        let up: Vec<f64> = xs.iter().map(|x| 0.1 * x + 0.5).collect();
        let down: Vec<f64> = xs.iter().map(|x| -3.0 * x + 1.0).collect();
        let a = pearson(&xs, &up).unwrap();
        assert_eq!((a.r, a.p), (1.0, 0.0));
        let b = pearson(&xs, &down).unwrap();
        assert_eq!((b.r, b.p), (-1.0, 0.0));
    }

    #[test]
    fn undefined_cases() {
        assert_eq!(
            pearson(&[1.0, 2.0], &[3.0, 4.0]),
            Err(StatsError::TooFewSamples { needed: 3, got: 2 })
        );
        assert_eq!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(StatsError::ZeroVariance("xs")));
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[5.0; 3]), Err(StatsError::ZeroVariance("ys")));
    }

    #[test]
    fn p_formatting() {
        assert_eq!(format_p_value(0.004991), "4.99e-3");
        assert_eq!(format_p_value(1e-13), "<1e-12");
        assert_eq!(format_p_value(0.0), "<1e-12");
    }

    #[test]
    fn category_means() {
        let mut m = BTreeMap::new();
        m.insert(Phoneme::AA, 2.0);
        m.insert(Phoneme::OY, 4.0);
        m.insert(Phoneme::T, 100.0);
        assert_eq!(category_average(&m, Category::Vowel).unwrap(), 3.0);
        assert_eq!(category_average(&m, Category::Consonant).unwrap(), 100.0);
        m.clear();
        m.insert(Phoneme::AA, f64::NAN);
        assert!(category_average(&m, Category::Vowel).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn positive_affine_invariance(
                xs in prop::collection::vec(-100.0f64..100.0, 5..30),
                noise in prop::collection::vec(-1.0f64..1.0, 30),
                a in 0.1f64..10.0, b in -50.0f64..50.0,
            ) {
                let ys: Vec<f64> = xs.iter().zip(&noise).map(|(x, e)| x * 0.3 + e * 20.0).collect();
                prop_assume!(pearson(&xs, &ys).is_ok());
                let base = pearson(&xs, &ys).unwrap();
                let mapped: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
                let moved = pearson(&mapped, &ys).unwrap();
                prop_assert!((base.r - moved.r).abs() < 1e-9);
                prop_assert!(base.r.abs() <= 1.0);
                prop_assert!((0.0..=1.0).contains(&base.p));
            }
        }
    }
}
