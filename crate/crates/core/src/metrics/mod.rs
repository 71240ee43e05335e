//! Closed-form per-stream statistics: SNR CDFs, outage probabilities,
//! ergodic capacities and the high-SNR outage floor.
//!
//! Capacities are normalized (natural log); [`Capacity::bps_hz`] converts.

mod capacity;
mod cdf;

pub use capacity::{
    capacity, capacity_numeric, capacity_numeric_for, capacity_rayleigh, capacity_rician,
    convergence_row, sum_capacity, Capacity, ConvergenceRow, CONVERGENCE_TOLERANCE,
};
pub use cdf::{
    outage, outage_floor, outage_floor_for, outage_rayleigh, outage_rician, snr_cdf, snr_cdf_for,
    y_cdf, y_cdf_rayleigh, y_cdf_rician, y_cdf_rician_finite_sum, y_cdf_rician_series,
    RicianStreamLaw, StreamLaw,
};

use crate::channel::{ConfigError, SystemConfig};
use crate::quad::QuadError;
use crate::specfun::SpecfunError;
use crate::stage::{StageError, StageIndex};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Stage(#[from] StageError),
    #[error("stage 1 carries the Rician stream; the Rayleigh expression does not apply")]
    RicianStage,
    #[error("closed-form capacity requires kappa_t = 0 (got {kappa_t})")]
    TransmitImpairment { kappa_t: f64 },
    #[error("{what} = {value} is outside the admissible range")]
    Domain { what: &'static str, value: f64 },
    #[error("{func} produced {value}, outside [0, 1] beyond rounding")]
    OutOfRange { func: &'static str, value: f64 },
    #[error("{func}: no convergence within {terms} terms")]
    NonConvergence { func: &'static str, terms: usize },
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

pub type Result<T> = std::result::Result<T, MetricsError>;

/// Aggregate noise/distortion scale seen by one stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveNoiseParams {
    /// ψ, with the Gramian-trace term relaxed away.
    pub psi: f64,
    pub kappa_t_sq: f64,
    /// (K+1)/d_i^{−α_i}: maps Y_i to its unit-scatter normalization.
    pub scale: f64,
}

impl EffectiveNoiseParams {
    pub fn new(config: &SystemConfig, stage: StageIndex) -> Result<Self> {
        Self::build(config, stage, psi_approx(config))
    }

    /// As [`EffectiveNoiseParams::new`] with the thermal term N₀/p removed.
    pub fn floor(config: &SystemConfig, stage: StageIndex) -> Result<Self> {
        Self::build(config, stage, psi_floor(config))
    }

    fn build(config: &SystemConfig, stage: StageIndex, psi: f64) -> Result<Self> {
        check_stage(config, stage)?;
        Ok(Self {
            psi,
            kappa_t_sq: config.kappa_t * config.kappa_t,
            scale: (config.rician_k + 1.0) / config.path_gain(stage.get() - 1),
        })
    }

    /// Y-domain argument at which the SNR CDF is read, or `None` at and
    /// beyond the 1/κ_T² ceiling.
    pub fn y_threshold(&self, snr: f64) -> Option<f64> {
        let denom = 1.0 - self.kappa_t_sq * snr;
        (denom > 0.0).then(|| self.psi * snr / denom)
    }
}

/// ψ_a = κ_R²M + N₀/p + σ²M(1+κ_T²).
pub fn psi_approx(config: &SystemConfig) -> f64 {
    psi_floor(config) + config.noise_power / config.transmit_power()
}

/// ψ_a + σ²(κ_R²M + N₀/p)·tr[(HᴴH)⁻¹].
pub fn psi_exact(config: &SystemConfig, trace_inv_gram: f64) -> f64 {
    let m = config.n_tx as f64;
    let s2 = config.sigma_est * config.sigma_est;
    let receive = config.kappa_r * config.kappa_r * m + config.noise_power / config.transmit_power();
    psi_approx(config) + s2 * receive * trace_inv_gram
}

fn psi_floor(config: &SystemConfig) -> f64 {
    let m = config.n_tx as f64;
    let s2 = config.sigma_est * config.sigma_est;
    config.kappa_r * config.kappa_r * m + s2 * m * (1.0 + config.kappa_t * config.kappa_t)
}

fn check_stage(config: &SystemConfig, stage: StageIndex) -> Result<()> {
    config.validate()?;
    if stage.get() > config.n_tx {
        return Err(StageError {
            stage: stage.get(),
            n_tx: config.n_tx,
        }
        .into());
    }
    Ok(())
}

/// Rounding excursions up to 1e-9 are clamped into [0, 1]; larger ones are
/// errors.
fn clamp_probability(func: &'static str, value: f64) -> Result<f64> {
    if !(-1e-9..=1.0 + 1e-9).contains(&value) {
        return Err(MetricsError::OutOfRange { func, value });
    }
    Ok(value.clamp(0.0, 1.0))
}
