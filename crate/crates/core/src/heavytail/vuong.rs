//! Vuong's likelihood-ratio test for non-nested models.

use serde::Serialize;
use statrs::function::erf::erfc;
use std::f64::consts::FRAC_1_SQRT_2;

use super::{TailError, TailFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Preference {
    First,
    Second,
    Indistinguishable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VuongResult {
    /// Positive when the power law fits better.
    pub statistic: f64,
    pub p_value: f64,
    /// `power_law`, `log_normal` or `indistinguishable`.
    pub preferred: String,
    pub n: usize,
    pub significance: f64,
    pub mean_log_ratio: f64,
}

/// `(statistic, two-sided p-value)` for pointwise log-likelihoods of two
/// models on the same points. Identical inputs give `(0, 1)`.
pub fn vuong_from_loglik(first: &[f64], second: &[f64]) -> (f64, f64) {
    assert_eq!(first.len(), second.len());
    let n = first.len();
    if n < 2 {
        return (0.0, 1.0);
    }
    let r: Vec<f64> = first.iter().zip(second).map(|(a, b)| a - b).collect();
    let mean = r.iter().sum::<f64>() / n as f64;
    let var = r.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    if var <= 0.0 || !var.is_finite() {
        return (0.0, 1.0);
    }
    let stat = mean * (n as f64).sqrt() / var.sqrt();
    (stat, erfc(stat.abs() * FRAC_1_SQRT_2))
}

pub fn preference(statistic: f64, p_value: f64, significance: f64) -> Preference {
    if p_value >= significance || statistic == 0.0 {
        Preference::Indistinguishable
    } else if statistic > 0.0 {
        Preference::First
    } else {
        Preference::Second
    }
}

/// Compares a power-law and a log-normal fit on their shared tail.
pub fn vuong_compare(
    power_law: &TailFit,
    log_normal: &TailFit,
    samples: &[u64],
    significance: f64,
) -> Result<VuongResult, TailError> {
    if power_law.xmin != log_normal.xmin {
        return Err(TailError::SharedSupportViolation {
            power_law: power_law.xmin,
            log_normal: log_normal.xmin,
        });
    }
    let xmin = power_law.xmin;
    let tail: Vec<u64> = samples.iter().copied().filter(|&x| x >= xmin).collect();
    let a: Vec<f64> = tail.iter().map(|&x| power_law.model.log_pmf(xmin, x)).collect();
    let b: Vec<f64> = tail.iter().map(|&x| log_normal.model.log_pmf(xmin, x)).collect();
    let (statistic, p_value) = vuong_from_loglik(&a, &b);
    let mean_log_ratio = if tail.is_empty() {
        0.0
    } else {
        a.iter().zip(&b).map(|(x, y)| x - y).sum::<f64>() / tail.len() as f64
    };
    let preferred = match preference(statistic, p_value, significance) {
        Preference::First => power_law.model.name(),
        Preference::Second => log_normal.model.name(),
        Preference::Indistinguishable => "indistinguishable",
    };
    Ok(VuongResult {
        statistic,
        p_value,
        preferred: preferred.to_string(),
        n: tail.len(),
        significance,
        mean_log_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heavytail::Model;
    use proptest::prelude::*;

    #[test]
    fn identical_models_are_indistinguishable() {
        let ll = [-1.0, -2.0, -0.5];
        let (s, p) = vuong_from_loglik(&ll, &ll);
        assert_eq!((s, p), (0.0, 1.0));
        assert_eq!(preference(s, p, 0.05), Preference::Indistinguishable);
    }

    #[test]
    fn mismatched_xmin_rejected() {
        let pl = TailFit {
            model: Model::PowerLaw { alpha: 2.0 },
            xmin: 1,
            n_tail: 2,
            n_total: 2,
            log_likelihood: 0.0,
            ks_stat: 0.0,
        };
        let ln = TailFit {
            model: Model::LogNormal { mu: 0.0, sigma: 1.0 },
            xmin: 2,
            ..pl.clone()
        };
        assert!(matches!(
            vuong_compare(&pl, &ln, &[1, 2, 3], 0.05),
            Err(TailError::SharedSupportViolation { .. })
        ));
    }

    #[test]
    fn normal_tail_probability() {
        let a = [0.0, 0.0, 0.0, 0.0];
        let b = [-1.0, -1.2, -0.8, -1.0];
        let (s, p) = vuong_from_loglik(&a, &b);
        // mean 1, sd sqrt(0.08/3), n 4.
        let expected = 1.0 * 2.0 / (0.08f64 / 3.0).sqrt();
        assert!((s - expected).abs() < 1e-12);
        assert!(p < 1e-10);
    }

    proptest! {
        #[test]
        fn antisymmetric(a in prop::collection::vec(-10.0f64..0.0, 2..50), shift in prop::collection::vec(-1.0f64..1.0, 50)) {
            let b: Vec<f64> = a.iter().zip(&shift).map(|(x, s)| x + s).collect();
            let (s1, p1) = vuong_from_loglik(&a, &b);
            let (s2, p2) = vuong_from_loglik(&b, &a);
            prop_assert!((s1 + s2).abs() < 1e-12);
            prop_assert!((p1 - p2).abs() < 1e-15);
        }
    }
}
