//! Empirical outage, capacity and inverse-Wishart trace statistics.

use super::linalg::{deflate, Gram};
use super::snr::stream_snr;
use super::{mean_var, run_trials, with_channel, MonteCarloReport, Result, SimError};
use crate::channel::SystemConfig;
use crate::stage::{DetectionMode, SnrModel, StageIndex};

fn needs_omega(config: &SystemConfig, mode: DetectionMode) -> bool {
    mode.snr_model == SnrModel::FullSystem && config.sigma_est > 0.0
}

/// Per-trial SNR samples (trial order) and the number of redrawn channels.
pub fn sample_snr(
    config: &SystemConfig,
    stage: StageIndex,
    mode: DetectionMode,
    trials: u64,
    seed: u64,
) -> Result<(Vec<f64>, u64)> {
    config.validate()?;
    let omega = needs_omega(config, mode);
    let s = run_trials(trials, seed, |rng| {
        with_channel(config, rng, omega, |real| stream_snr(real, config, stage, mode))
    })?;
    Ok((s.values, s.resampled))
}

/// Fraction of trials with SNR below γ_th; std error √(p̂(1−p̂)/trials).
pub fn estimate_outage(
    config: &SystemConfig,
    stage: StageIndex,
    gamma_th: f64,
    mode: DetectionMode,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloReport> {
    let (snr, resampled) = sample_snr(config, stage, mode, trials, seed)?;
    let hits = snr.iter().filter(|&&s| s < gamma_th).count();
    let p = hits as f64 / trials as f64;
    Ok(MonteCarloReport::new(trials, seed, p, (p * (1.0 - p) / trials as f64).sqrt(), resampled))
}

/// Sample mean of log₂(1 + SNR) in bps/Hz.
pub fn estimate_capacity(
    config: &SystemConfig,
    stage: StageIndex,
    mode: DetectionMode,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloReport> {
    let (snr, resampled) = sample_snr(config, stage, mode, trials, seed)?;
    let rates: Vec<f64> = snr.iter().map(|s| s.ln_1p() / std::f64::consts::LN_2).collect();
    let (mean, var) = mean_var(&rates);
    Ok(MonteCarloReport::new(trials, seed, mean, (var / trials as f64).sqrt(), resampled))
}

/// Approximate moments of tr[(H_iᴴH_i)⁻¹] for the ZF-SIC matrix of `stage`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WishartReference {
    pub mean: f64,
    pub variance: f64,
}

/// With M' = M−i+1 columns and Σ = E[H_iᴴH_i]/N (diagonal here, since only
/// the first column has a LOS part):
/// mean = tr Σ⁻¹/(N−M') and
/// variance = M'N/((N−M')²((N−M')²−1)) · (tr Σ⁻¹/M')².
/// Both are exact for a central Wishart with Σ = I.
pub fn wishart_trace_reference(config: &SystemConfig, stage: StageIndex) -> Result<WishartReference> {
    config.validate()?;
    let cols = config.n_tx + 1 - stage.get();
    if stage.get() > config.n_tx || config.n_rx < cols + 2 {
        return Err(SimError::WishartValidity {
            n_rx: config.n_rx,
            columns: cols,
        });
    }
    let trace_sigma_inv: f64 = (stage.get() - 1..config.n_tx)
        .map(|j| {
            if j == 0 {
                1.0 / config.path_gain(0)
            } else {
                1.0 / config.scatter_variance(j)
            }
        })
        .sum();
    let (n, mp) = (config.n_rx as f64, cols as f64);
    let dof = n - mp;
    Ok(WishartReference {
        mean: trace_sigma_inv / dof,
        variance: mp * n / (dof * dof * (dof * dof - 1.0)) * (trace_sigma_inv / mp).powi(2),
    })
}

/// Sample mean and sample variance of the trace, each with its standard
/// error and the analytic reference attached.
pub fn wishart_trace_stats(
    config: &SystemConfig,
    stage: StageIndex,
    trials: u64,
    seed: u64,
) -> Result<(MonteCarloReport, MonteCarloReport)> {
    let reference = wishart_trace_reference(config, stage)?;
    let first = stage.get() - 1;
    let s = run_trials(trials, seed, |rng| {
        with_channel(config, rng, false, |real| Ok(Gram::new(&deflate(&real.h_true, first))?.inverse_trace()))
    })?;
    let n = trials as f64;
    let (mean, var) = mean_var(&s.values);
    let m4 = s.values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    let var_se = if trials > 3 {
        ((m4 - var * var * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt()
    } else {
        f64::INFINITY
    };
    Ok((
        MonteCarloReport::new(trials, seed, mean, (var / n).sqrt(), s.resampled).with_reference(reference.mean),
        MonteCarloReport::new(trials, seed, var, var_se, s.resampled).with_reference(reference.variance),
    ))
}
