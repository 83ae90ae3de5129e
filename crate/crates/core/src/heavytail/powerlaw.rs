//! Discrete power law `p(x) = x^{-α} / ζ(α, xmin)` on `x ≥ xmin`.

use argmin::core::{CostFunction, Error as ArgminError, Executor};
use argmin::solver::brent::BrentOpt;
use rand::Rng;

use super::zeta::ln_hurwitz_zeta;
use super::{ks_distance, Model, Tail, TailError, TailFit, TailOptions};

pub(crate) const ALPHA_MIN: f64 = 1.0 + 1e-6;
pub(crate) const ALPHA_MAX: f64 = 50.0;

pub fn log_pmf(alpha: f64, xmin: u64, x: u64) -> f64 {
    -alpha * (x as f64).ln() - ln_hurwitz_zeta(alpha, xmin as f64)
}

/// `P(X ≥ x)` for `x ≥ xmin`.
pub fn survival(alpha: f64, xmin: u64, x: u64) -> f64 {
    if x <= xmin {
        return 1.0;
    }
    (ln_hurwitz_zeta(alpha, x as f64) - ln_hurwitz_zeta(alpha, xmin as f64)).exp()
}

struct NegLogLik {
    n: f64,
    sum_log: f64,
    xmin: f64,
}

impl CostFunction for NegLogLik {
    type Param = f64;
    type Output = f64;

    fn cost(&self, alpha: &f64) -> Result<f64, ArgminError> {
        Ok(self.n * ln_hurwitz_zeta(*alpha, self.xmin) + alpha * self.sum_log)
    }
}

/// Maximum-likelihood α for a tail with `n` points, `Σ ln x = sum_log`.
pub(crate) fn mle_alpha(n: usize, sum_log: f64, xmin: u64) -> Result<f64, TailError> {
    let problem = NegLogLik {
        n: n as f64,
        sum_log,
        xmin: xmin as f64,
    };
    let solver = BrentOpt::new(ALPHA_MIN, ALPHA_MAX).set_tolerance(1e-10, 1e-12);
    let result = Executor::new(problem, solver)
        .configure(|state| state.param(2.5).max_iters(500))
        .run()
        .map_err(|e| TailError::Optimizer(e.to_string()))?;
    result
        .state
        .best_param
        .filter(|a| a.is_finite())
        .ok_or_else(|| TailError::Optimizer("no parameter returned".into()))
}

fn fit_at(tail: &Tail<'_>) -> Result<TailFit, TailError> {
    let alpha = mle_alpha(tail.n, tail.sum_log, tail.xmin)?;
    let ln_z = ln_hurwitz_zeta(alpha, tail.xmin as f64);
    let log_likelihood = -(tail.n as f64) * ln_z - alpha * tail.sum_log;
    let ks_stat = ks_distance(tail, |x| survival(alpha, tail.xmin, x));
    Ok(TailFit {
        model: Model::PowerLaw { alpha },
        xmin: tail.xmin,
        n_tail: tail.n,
        n_total: tail.n_total,
        log_likelihood,
        ks_stat,
    })
}

/// Fits α for every admissible `xmin` and keeps the fit with the smallest KS
/// distance (smallest `xmin` on ties).
///
/// An `xmin` is admissible when its tail keeps at least `min_tail` points
/// (or all points, for shorter inputs) and at least two distinct values.
pub fn fit_power_law(samples: &[u64], options: &TailOptions) -> Result<TailFit, TailError> {
    let distinct = super::Distinct::new(samples)?;
    if let Some(xmin) = options.xmin {
        let tail = distinct.tail_from(xmin).ok_or(TailError::DegenerateInput)?;
        return fit_at(&tail);
    }
    let need = options.min_tail.min(samples.len());
    let mut best: Option<TailFit> = None;
    for tail in distinct.tails().take_while(|t| t.n >= need && t.values.len() >= 2) {
        let fit = fit_at(&tail)?;
        if best.as_ref().is_none_or(|b| fit.ks_stat < b.ks_stat) {
            best = Some(fit);
        }
    }
    best.ok_or(TailError::DegenerateInput)
}

const TABLE_LEN: usize = 4096;

/// Exact inverse-CDF sampler for the discrete power law.
#[derive(Debug, Clone)]
pub struct PowerLawSampler {
    alpha: f64,
    xmin: u64,
    /// `table[k] = P(X ≥ xmin + k)`.
    table: Vec<f64>,
}

impl PowerLawSampler {
    pub fn new(alpha: f64, xmin: u64) -> Self {
        assert!(alpha > 1.0 && xmin >= 1);
        let ln_z0 = ln_hurwitz_zeta(alpha, xmin as f64);
        let mut table = Vec::with_capacity(TABLE_LEN);
        let mut s = 1.0;
        for k in 0..TABLE_LEN {
            let x = xmin + k as u64;
            if k % 256 == 0 {
                s = survival(alpha, xmin, x);
            }
            table.push(s);
            s -= (-alpha * (x as f64).ln() - ln_z0).exp();
        }
        Self { alpha, xmin, table }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        // u in (0, 1]; X is the largest x with P(X ≥ x) ≥ u.
        let u = 1.0 - rng.random::<f64>();
        let k = self.table.partition_point(|&s| s >= u);
        if k < self.table.len() {
            return self.xmin + k as u64 - 1;
        }
        let mut lo = self.xmin + TABLE_LEN as u64 - 1;
        let mut hi = lo.saturating_mul(2);
        while hi < u64::MAX / 4 && survival(self.alpha, self.xmin, hi) >= u {
            lo = hi;
            hi = hi.saturating_mul(2);
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if survival(self.alpha, self.xmin, mid) >= u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}
