//! Semi-parametric bootstrap goodness of fit for the power-law tail.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::powerlaw::{fit_power_law, PowerLawSampler};
use super::{Model, TailError, TailFit, TailOptions};

pub const MIN_SIMULATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GofResult {
    pub p_value: f64,
    pub n_bootstrap: usize,
    pub seed: u64,
    pub observed_ks: f64,
    pub exceedances: usize,
}

/// Random stream for simulation `index` under `seed`.
pub(crate) fn simulation_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Each simulation keeps the sample size, draws each point from the fitted
/// tail with probability `n_tail / n` and otherwise resamples one of the
/// observed values below `xmin`, then refits with the same options. The
/// p-value is the share of simulations whose KS distance reaches the
/// observed one.
pub fn gof_bootstrap(
    fit: &TailFit,
    samples: &[u64],
    n_sims: usize,
    seed: u64,
    options: &TailOptions,
) -> Result<GofResult, TailError> {
    let Model::PowerLaw { alpha } = fit.model else {
        return Err(TailError::WrongModel("power_law"));
    };
    if n_sims < MIN_SIMULATIONS {
        return Err(TailError::TooFewSimulations(n_sims));
    }
    let mut below: Vec<u64> = samples.iter().copied().filter(|&x| x < fit.xmin).collect();
    below.sort_unstable();
    let n = samples.len();
    let p_tail = fit.n_tail as f64 / n as f64;
    let sampler = PowerLawSampler::new(alpha, fit.xmin);

    let exceed: Vec<bool> = (0..n_sims as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = simulation_rng(seed, i);
            let synthetic: Vec<u64> = (0..n)
                .map(|_| {
                    if below.is_empty() || rng.random::<f64>() < p_tail {
                        sampler.sample(&mut rng)
                    } else {
                        below[rng.random_range(0..below.len())]
                    }
                })
                .collect();
            // A synthetic set too degenerate to fit counts as at least as
            // extreme as the data.
            fit_power_law(&synthetic, options).map_or(true, |f| f.ks_stat >= fit.ks_stat)
        })
        .collect();
    let exceedances = exceed.iter().filter(|&&e| e).count();
    Ok(GofResult {
        p_value: exceedances as f64 / n_sims as f64,
        n_bootstrap: n_sims,
        seed,
        observed_ks: fit.ks_stat,
        exceedances,
    })
}
