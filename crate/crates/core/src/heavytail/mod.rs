//! Heavy-tail fitting for positive integer data: discrete power law and
//! discretized log-normal, bootstrap goodness of fit and Vuong's test.

mod gof;
mod lognormal;
mod powerlaw;
mod vuong;
pub mod zeta;

pub use gof::{gof_bootstrap, GofResult, MIN_SIMULATIONS};
pub use lognormal::{fit_lognormal_tail, LogNormalSampler};
pub use powerlaw::{fit_power_law, PowerLawSampler};
pub use vuong::{vuong_compare, vuong_from_loglik, Preference, VuongResult};

use serde::Serialize;

pub const DEFAULT_MIN_TAIL: usize = 50;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TailError {
    #[error("input needs at least two distinct values")]
    DegenerateInput,
    #[error("sample {index} is not a positive integer")]
    NonPositiveSample { index: usize },
    #[error("fits use different xmin values ({power_law} and {log_normal})")]
    SharedSupportViolation { power_law: u64, log_normal: u64 },
    #[error("bootstrap needs at least {MIN_SIMULATIONS} simulations, got {0}")]
    TooFewSimulations(usize),
    #[error("fit expected a {0} model")]
    WrongModel(&'static str),
    #[error("optimizer failed: {0}")]
    Optimizer(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Model {
    PowerLaw { alpha: f64 },
    LogNormal { mu: f64, sigma: f64 },
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::PowerLaw { .. } => "power_law",
            Model::LogNormal { .. } => "log_normal",
        }
    }

    /// The exponent of a power-law model.
    pub fn alpha(&self) -> Option<f64> {
        match *self {
            Model::PowerLaw { alpha } => Some(alpha),
            Model::LogNormal { .. } => None,
        }
    }

    pub fn log_pmf(&self, xmin: u64, x: u64) -> f64 {
        match *self {
            Model::PowerLaw { alpha } => powerlaw::log_pmf(alpha, xmin, x),
            Model::LogNormal { mu, sigma } => lognormal::log_pmf(mu, sigma, xmin, x),
        }
    }

    /// `P(X ≥ x)` under the model truncated at `xmin`.
    pub fn survival(&self, xmin: u64, x: u64) -> f64 {
        match *self {
            Model::PowerLaw { alpha } => powerlaw::survival(alpha, xmin, x),
            Model::LogNormal { mu, sigma } => lognormal::survival(mu, sigma, xmin, x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailFit {
    #[serde(flatten)]
    pub model: Model,
    pub xmin: u64,
    pub n_tail: usize,
    pub n_total: usize,
    pub log_likelihood: f64,
    /// Largest gap between the empirical and fitted CDFs over the tail.
    pub ks_stat: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TailOptions {
    /// Smallest tail an `xmin` candidate may leave.
    pub min_tail: usize,
    /// Use this `xmin` instead of searching.
    pub xmin: Option<u64>,
}

impl Default for TailOptions {
    fn default() -> Self {
        Self {
            min_tail: DEFAULT_MIN_TAIL,
            xmin: None,
        }
    }
}

/// Sorted distinct values with multiplicities and suffix sums.
pub(crate) struct Distinct {
    values: Vec<u64>,
    counts: Vec<usize>,
    suffix_n: Vec<usize>,
    suffix_log: Vec<f64>,
}

pub(crate) struct Tail<'a> {
    pub xmin: u64,
    pub values: &'a [u64],
    pub counts: &'a [usize],
    pub n: usize,
    pub n_total: usize,
    pub sum_log: f64,
}

impl Distinct {
    pub fn new(samples: &[u64]) -> Result<Self, TailError> {
        if let Some(index) = samples.iter().position(|&x| x == 0) {
            return Err(TailError::NonPositiveSample { index });
        }
        let mut sorted = samples.to_vec();
        sorted.sort_unstable();
        let mut values = Vec::new();
        let mut counts = Vec::new();
        for run in sorted.chunk_by(|a, b| a == b) {
            values.push(run[0]);
            counts.push(run.len());
        }
        if values.len() < 2 {
            return Err(TailError::DegenerateInput);
        }
        let d = values.len();
        let mut suffix_n = vec![0; d + 1];
        let mut suffix_log = vec![0.0; d + 1];
        for k in (0..d).rev() {
            suffix_n[k] = suffix_n[k + 1] + counts[k];
            suffix_log[k] = suffix_log[k + 1] + counts[k] as f64 * (values[k] as f64).ln();
        }
        Ok(Self {
            values,
            counts,
            suffix_n,
            suffix_log,
        })
    }

    fn tail_at(&self, k: usize, xmin: u64) -> Tail<'_> {
        Tail {
            xmin,
            values: &self.values[k..],
            counts: &self.counts[k..],
            n: self.suffix_n[k],
            n_total: self.suffix_n[0],
            sum_log: self.suffix_log[k],
        }
    }

    /// Tails starting at each distinct value, largest first.
    pub fn tails(&self) -> impl Iterator<Item = Tail<'_>> {
        (0..self.values.len()).map(|k| self.tail_at(k, self.values[k]))
    }

    /// Tail of values `≥ xmin`, if it holds at least two distinct values.
    pub fn tail_from(&self, xmin: u64) -> Option<Tail<'_>> {
        let k = self.values.partition_point(|&v| v < xmin);
        (self.values.len() - k >= 2 && xmin >= 1).then(|| self.tail_at(k, xmin))
    }
}

/// Supremum over integers `x ≥ xmin` of the gap between the empirical tail
/// CDF and `1 - survival(x + 1)`.
pub(crate) fn ks_distance(tail: &Tail<'_>, survival: impl Fn(u64) -> f64) -> f64 {
    let n = tail.n as f64;
    let mut cum = 0usize;
    let mut prev = 0.0;
    let mut d: f64 = 0.0;
    for (&v, &c) in tail.values.iter().zip(tail.counts) {
        if v > tail.xmin {
            // Just below v the empirical CDF is still `prev`.
            d = d.max((prev - (1.0 - survival(v))).abs());
        }
        cum += c;
        let emp = cum as f64 / n;
        d = d.max((emp - (1.0 - survival(v + 1))).abs());
        prev = emp;
    }
    d.min(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CdfPoint {
    pub x: u64,
    pub empirical_ccdf: f64,
    pub fitted_ccdf: f64,
}

/// Empirical and fitted `P(X ≥ x)` at each distinct tail value.
pub fn cdf_points(samples: &[u64], fit: &TailFit) -> Vec<CdfPoint> {
    let mut tail: Vec<u64> = samples.iter().copied().filter(|&x| x >= fit.xmin).collect();
    tail.sort_unstable();
    let n = tail.len() as f64;
    let mut out = Vec::new();
    let mut below = 0usize;
    for run in tail.chunk_by(|a, b| a == b) {
        out.push(CdfPoint {
            x: run[0],
            empirical_ccdf: (tail.len() - below) as f64 / n,
            fitted_ccdf: fit.model.survival(fit.xmin, run[0]),
        });
        below += run.len();
    }
    out
}

/// Power-law fit, log-normal fit on the same tail, and their comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailReport {
    pub power_law: TailFit,
    pub log_normal: TailFit,
    pub vuong: VuongResult,
    pub gof: Option<GofResult>,
}

pub fn analyze_tail(
    samples: &[u64],
    options: &TailOptions,
    n_sims: usize,
    seed: u64,
    significance: f64,
) -> Result<TailReport, TailError> {
    let power_law = fit_power_law(samples, options)?;
    let log_normal = fit_lognormal_tail(samples, power_law.xmin)?;
    let vuong = vuong_compare(&power_law, &log_normal, samples, significance)?;
    let gof = if n_sims > 0 {
        Some(gof_bootstrap(&power_law, samples, n_sims, seed, options)?)
    } else {
        None
    };
    Ok(TailReport {
        power_law,
        log_normal,
        vuong,
        gof,
    })
}
