//! Per-realization SNR of one detected stream.

use num_complex::Complex64;

use super::linalg::{deflate, Gram};
use super::Result;
use crate::channel::{estimated_channel, ChannelRealization, SystemConfig};
use crate::metrics::psi_exact;
use crate::stage::{DetectionMode, Detector, SnrModel, StageIndex};

fn check(config: &SystemConfig, stage: StageIndex) -> Result<()> {
    config.validate()?;
    if stage.get() > config.n_tx {
        return Err(crate::stage::StageError {
            stage: stage.get(),
            n_tx: config.n_tx,
        }
        .into());
    }
    Ok(())
}

/// Column of the detected stream inside the matrix seen at `stage`.
fn desired(stage: StageIndex, detector: Detector) -> usize {
    stage.get() - 1 - detector.first_column(stage)
}

/// SNR = 1/(κ_T² + ψ_exact · [(HᴴH)⁻¹]_des), with H the true channel
/// restricted to the columns visible at `stage` and ψ_exact using that
/// matrix's Gramian trace.
pub fn stream_snr_statistic(
    real: &ChannelRealization,
    config: &SystemConfig,
    stage: StageIndex,
    detector: Detector,
) -> Result<f64> {
    check(config, stage)?;
    let h = deflate(&real.h_true, detector.first_column(stage));
    let gram = Gram::new(&h)?;
    let psi = psi_exact(config, gram.inverse_trace());
    Ok(1.0 / (config.kappa_t * config.kappa_t + psi * gram.inverse_diag(desired(stage, detector))))
}

/// Exact SINR after a ZF filter built from the estimate Ĥ, with
/// interference, transmit distortion, receive distortion and noise all
/// passed through the true channel columns visible at `stage`.
pub fn stream_sinr_full(
    real: &ChannelRealization,
    config: &SystemConfig,
    stage: StageIndex,
    detector: Detector,
) -> Result<f64> {
    check(config, stage)?;
    let first = detector.first_column(stage);
    let des = desired(stage, detector);
    let h_hat = deflate(&estimated_channel(real, config.sigma_est)?, first);
    let h = deflate(&real.h_true, first);
    let gram = Gram::new(&h_hat)?;
    let g = &h_hat * gram.solve_unit(des);

    let p = config.transmit_power();
    let m = config.n_tx as f64;
    let (mut signal, mut interference, mut through) = (0.0, 0.0, 0.0);
    for (j, col) in h.column_iter().enumerate() {
        let a: Complex64 = g.dotc(&col);
        let power = a.norm_sqr();
        through += power;
        if j == des {
            signal = power;
        } else {
            interference += power;
        }
    }
    let noise = (p * config.kappa_r * config.kappa_r * m + config.noise_power) * g.norm_squared();
    Ok(p * signal / (p * interference + p * config.kappa_t * config.kappa_t * through + noise))
}

/// Dispatch on the SNR model.
pub fn stream_snr(real: &ChannelRealization, config: &SystemConfig, stage: StageIndex, mode: DetectionMode) -> Result<f64> {
    match mode.snr_model {
        SnrModel::Statistic => stream_snr_statistic(real, config, stage, mode.detector),
        SnrModel::FullSystem => stream_sinr_full(real, config, stage, mode.detector),
    }
}
