//! Log-normal discretized by flooring: `X = ⌊Y⌋`, `ln Y ~ N(μ, σ²)`,
//! truncated to `X ≥ xmin` and renormalized.

use argmin::core::{CostFunction, Error as ArgminError, Executor};
use argmin::solver::neldermead::NelderMead;
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::erfc;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use super::{ks_distance, Distinct, Model, TailError, TailFit};

/// `ln P(Z ≥ z)` for standard normal `Z`, accurate far into the upper tail.
fn ln_upper(z: f64) -> f64 {
    if z < 25.0 {
        (0.5 * erfc(z * FRAC_1_SQRT_2)).ln()
    } else {
        // Asymptotic series for the Mills ratio.
        let w = 1.0 / (z * z);
        let series = 1.0 - w * (1.0 - 3.0 * w * (1.0 - 5.0 * w * (1.0 - 7.0 * w * (1.0 - 9.0 * w))));
        -0.5 * z * z - (z * (2.0 * PI).sqrt()).ln() + series.ln()
    }
}

fn ln_phi(z: f64) -> f64 {
    -0.5 * z * z - 0.5 * (2.0 * PI).ln()
}

/// `ln P(a ≤ Z < b)` for `0 ≤ a < b`, as a difference of upper tails in log space.
fn ln_upper_interval(a: f64, b: f64) -> f64 {
    let la = ln_upper(a);
    let d = ln_upper(b) - la;
    if d < -1e-4 {
        la + (-d.exp_m1()).ln()
    } else {
        // Interval short against the local scale: midpoint rule on the density.
        ln_phi(0.5 * (a + b)) + (b - a).ln()
    }
}

/// `ln P(a ≤ Z < b)` for `a < b`, working in whichever tail avoids cancellation.
fn ln_interval(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        ln_upper_interval(a, b)
    } else if b <= 0.0 {
        ln_upper_interval(-b, -a)
    } else {
        (1.0 - 0.5 * erfc(b * FRAC_1_SQRT_2) - 0.5 * erfc(-a * FRAC_1_SQRT_2)).ln()
    }
}

fn z(mu: f64, sigma: f64, x: u64) -> f64 {
    ((x as f64).ln() - mu) / sigma
}

pub fn log_pmf(mu: f64, sigma: f64, xmin: u64, x: u64) -> f64 {
    ln_interval(z(mu, sigma, x), z(mu, sigma, x + 1)) - ln_upper(z(mu, sigma, xmin))
}

/// `P(X ≥ x)` for `x ≥ xmin`.
pub fn survival(mu: f64, sigma: f64, xmin: u64, x: u64) -> f64 {
    if x <= xmin {
        return 1.0;
    }
    (ln_upper(z(mu, sigma, x)) - ln_upper(z(mu, sigma, xmin))).exp()
}

struct NegLogLik<'a> {
    values: &'a [u64],
    counts: &'a [usize],
    xmin: u64,
}

impl NegLogLik<'_> {
    fn eval(&self, mu: f64, sigma: f64) -> f64 {
        let norm = ln_upper(z(mu, sigma, self.xmin));
        let mut ll = 0.0;
        for (&v, &c) in self.values.iter().zip(self.counts) {
            ll += c as f64 * (ln_interval(z(mu, sigma, v), z(mu, sigma, v + 1)) - norm);
        }
        -ll
    }
}

impl CostFunction for NegLogLik<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Vec<f64>) -> Result<f64, ArgminError> {
        let sigma = p[1].exp();
        let v = self.eval(p[0], sigma);
        Ok(if v.is_finite() && sigma.is_finite() && sigma > 1e-8 {
            v
        } else {
            f64::MAX
        })
    }
}

/// Maximum-likelihood `(μ, σ)` on the samples `≥ xmin`, optimized over
/// `(μ, ln σ)` with Nelder–Mead from the moments of `ln x`.
pub fn fit_lognormal_tail(samples: &[u64], xmin: u64) -> Result<TailFit, TailError> {
    let distinct = Distinct::new(samples)?;
    let tail = distinct.tail_from(xmin).ok_or(TailError::DegenerateInput)?;
    let n = tail.n as f64;
    let mean = tail.sum_log / n;
    let var = tail
        .values
        .iter()
        .zip(tail.counts)
        .map(|(&v, &c)| c as f64 * ((v as f64).ln() - mean).powi(2))
        .sum::<f64>()
        / n;
    let s0 = var.sqrt().max(0.25);
    let start = vec![mean, s0.ln()];
    let simplex = vec![start.clone(), vec![mean + s0, s0.ln()], vec![mean, s0.ln() + 0.5]];
    let problem = NegLogLik {
        values: tail.values,
        counts: tail.counts,
        xmin,
    };
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(1e-12)
        .map_err(|e| TailError::Optimizer(e.to_string()))?;
    let result = Executor::new(problem, solver)
        .configure(|state| state.max_iters(4000))
        .run()
        .map_err(|e| TailError::Optimizer(e.to_string()))?;
    let best = result
        .state
        .best_param
        .ok_or_else(|| TailError::Optimizer("no parameter returned".into()))?;
    let (mu, sigma) = (best[0], best[1].exp());
    let problem = NegLogLik {
        values: tail.values,
        counts: tail.counts,
        xmin,
    };
    let log_likelihood = -problem.eval(mu, sigma);
    if !log_likelihood.is_finite() {
        return Err(TailError::Optimizer("non-finite log-likelihood".into()));
    }
    let ks_stat = ks_distance(&tail, |x| survival(mu, sigma, xmin, x));
    Ok(TailFit {
        model: Model::LogNormal { mu, sigma },
        xmin,
        n_tail: tail.n,
        n_total: tail.n_total,
        log_likelihood,
        ks_stat,
    })
}

/// Rejection sampler for the truncated, floored log-normal.
#[derive(Debug, Clone)]
pub struct LogNormalSampler {
    mu: f64,
    sigma: f64,
    xmin: u64,
}

impl LogNormalSampler {
    pub fn new(mu: f64, sigma: f64, xmin: u64) -> Self {
        assert!(sigma > 0.0 && xmin >= 1);
        Self { mu, sigma, xmin }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        loop {
            let z: f64 = rng.sample(StandardNormal);
            let y = (self.mu + self.sigma * z).exp().floor();
            if y >= self.xmin as f64 && y < u64::MAX as f64 {
                return y as u64;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ContinuousCDF, LogNormal};

    #[test]
    fn pmf_agrees_with_independent_cdf() {
        let reference = LogNormal::new(1.0, 0.8).unwrap();
        let denom = 1.0 - reference.cdf(2.0);
        for x in 2..40u64 {
            let expected = (reference.cdf(x as f64 + 1.0) - reference.cdf(x as f64)) / denom;
            let got = log_pmf(1.0, 0.8, 2, x).exp();
            assert!((got - expected).abs() < 1e-12, "x {x}");
        }
        let total: f64 = (2..100_000).map(|x| log_pmf(1.0, 0.8, 2, x).exp()).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn far_tail_stays_finite() {
        assert!(log_pmf(0.0, 0.5, 1, 1_000_000).is_finite());
        assert!(survival(0.0, 0.3, 1, 1000) >= 0.0);
    }

    #[test]
    fn recovers_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = LogNormalSampler::new(1.0, 1.0, 1);
        let data: Vec<u64> = (0..5000).map(|_| s.sample(&mut rng)).collect();
        let fit = fit_lognormal_tail(&data, 1).unwrap();
        let Model::LogNormal { mu, sigma } = fit.model else { panic!() };
        assert!((mu - 1.0).abs() < 0.1, "mu {mu}");
        assert!((sigma - 1.0).abs() < 0.1, "sigma {sigma}");
    }

    #[test]
    fn minimal_and_constant_tails() {
        let fit = fit_lognormal_tail(&[3, 4, 4, 3, 1], 3).unwrap();
        let Model::LogNormal { sigma, .. } = fit.model else { panic!() };
        assert!(sigma > 0.0);
        assert!(matches!(fit_lognormal_tail(&[1, 5, 5, 5], 5), Err(TailError::DegenerateInput)));
    }
}
