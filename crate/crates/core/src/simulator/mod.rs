//! Monte Carlo link-level engine.
//!
//! Trials run in fixed blocks of [`BLOCK_TRIALS`]. Block b draws from
//! ChaCha8 seeded with `seed` on stream b, and blocks are reduced in index
//! order, so every report depends only on (seed, trials) and not on how
//! many worker threads rayon uses.

mod estimate;
mod lemma;
mod linalg;
mod snr;

pub use estimate::{
    estimate_capacity, estimate_outage, sample_snr, wishart_trace_reference, wishart_trace_stats,
    WishartReference,
};
pub use lemma::{
    ks_critical_one_sample, ks_critical_two_sample, ks_one_sample, ks_two_sample,
    sample_lemma_mixture, sample_normalized_gain,
};
pub use linalg::{inv_gram_diag, projection_dof_check, GramInverse, MAX_CONDITION};
pub use snr::{stream_sinr_full, stream_snr, stream_snr_statistic};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{sample_channel, ChannelError, ChannelRealization, ConfigError, SystemConfig};
use crate::metrics::MetricsError;
use crate::stage::StageError;

/// Trials per independent random stream.
pub const BLOCK_TRIALS: u64 = 4096;

/// Consecutive rejected realizations tolerated before giving up.
const MAX_RESAMPLES: u64 = 1000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Stage(#[from] StageError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("Gramian is rank deficient")]
    RankDeficient,
    #[error("Gramian condition bound {bound:e} exceeds the limit")]
    IllConditioned { bound: f64 },
    #[error("projection eigenvalue {eigenvalue} is neither 0 nor 1")]
    Projection { eigenvalue: f64 },
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("{attempts} consecutive ill-conditioned realizations")]
    ResamplingExhausted { attempts: u64 },
    #[error("inverse-Wishart moments need n_rx − columns ≥ 2 (n_rx = {n_rx}, columns = {columns})")]
    WishartValidity { n_rx: usize, columns: usize },
}

pub type Result<T> = std::result::Result<T, SimError>;

/// Outcome of one Monte Carlo estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloReport {
    pub trials: u64,
    pub seed: u64,
    pub estimate: f64,
    pub std_error: f64,
    /// Realizations redrawn because their Gramian was ill-conditioned.
    pub resampled: u64,
    pub analytic_ref: Option<f64>,
    pub rel_delta: Option<f64>,
}

impl MonteCarloReport {
    pub fn new(trials: u64, seed: u64, estimate: f64, std_error: f64, resampled: u64) -> Self {
        Self {
            trials,
            seed,
            estimate,
            std_error,
            resampled,
            analytic_ref: None,
            rel_delta: None,
        }
    }

    pub fn with_reference(mut self, reference: f64) -> Self {
        self.analytic_ref = Some(reference);
        self.rel_delta = Some((self.estimate - reference).abs() / reference.abs().max(f64::MIN_POSITIVE));
        self
    }

    /// |estimate − reference| in units of the standard error.
    pub fn sigmas(&self) -> Option<f64> {
        self.analytic_ref.map(|r| {
            let d = (self.estimate - r).abs();
            if d == 0.0 {
                0.0
            } else {
                d / self.std_error
            }
        })
    }
}

/// Samples drawn by [`run_trials`], in trial order.
pub(crate) struct Samples {
    pub values: Vec<f64>,
    pub resampled: u64,
}

/// Runs `trials` evaluations of `f`, one fresh stream per block.
pub(crate) fn run_trials<F>(trials: u64, seed: u64, f: F) -> Result<Samples>
where
    F: Fn(&mut ChaCha8Rng) -> Result<(f64, u64)> + Sync,
{
    if trials == 0 {
        return Err(SimError::NoTrials);
    }
    let blocks = trials.div_ceil(BLOCK_TRIALS);
    let per_block: Vec<(Vec<f64>, u64)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let len = BLOCK_TRIALS.min(trials - b * BLOCK_TRIALS);
            let mut values = Vec::with_capacity(len as usize);
            let mut resampled = 0;
            for _ in 0..len {
                let (v, r) = f(&mut rng)?;
                values.push(v);
                resampled += r;
            }
            Ok((values, resampled))
        })
        .collect::<Result<_>>()?;
    let mut out = Samples {
        values: Vec::with_capacity(trials as usize),
        resampled: 0,
    };
    for (v, r) in per_block {
        out.values.extend(v);
        out.resampled += r;
    }
    Ok(out)
}

/// Draws channels until `f` accepts one; ill-conditioned draws are counted.
pub(crate) fn with_channel<F>(config: &SystemConfig, rng: &mut ChaCha8Rng, with_omega: bool, f: F) -> Result<(f64, u64)>
where
    F: Fn(&ChannelRealization) -> Result<f64>,
{
    let mut resampled = 0;
    loop {
        let real = sample_channel(config, rng, with_omega);
        match f(&real) {
            Ok(v) => return Ok((v, resampled)),
            Err(SimError::IllConditioned { .. }) | Err(SimError::RankDeficient) => {
                resampled += 1;
                if resampled >= MAX_RESAMPLES {
                    return Err(SimError::ResamplingExhausted { attempts: resampled });
                }
            }
            Err(e) => return Err(e),
        }
    }
}

/// Sample mean and unbiased variance.
pub(crate) fn mean_var(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, ss / (n - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_reference() {
        let r = MonteCarloReport::new(100, 1, 0.5, 0.05, 0).with_reference(0.4);
        assert!((r.rel_delta.unwrap() - 0.25).abs() < 1e-15);
        assert!((r.sigmas().unwrap() - 2.0).abs() < 1e-12);
        let r = MonteCarloReport::new(100, 1, 0.0, 0.0, 0).with_reference(0.0);
        assert_eq!(r.sigmas(), Some(0.0));
    }

    #[test]
    fn block_layout_is_independent_of_threads() {
        use rand::Rng;
        let f = |rng: &mut ChaCha8Rng| Ok((rng.random::<f64>(), 0));
        let a = run_trials(10_000, 5, f).unwrap().values;
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| run_trials(10_000, 5, f)).unwrap().values;
        assert_eq!(a, b);
        assert!(run_trials(0, 5, f).is_err());
    }
}
