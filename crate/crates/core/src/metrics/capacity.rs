//! Ergodic capacities (normalized, natural log).
//!
//! With κ_T = 0 the SNR of a stream is u/(ψ·scale) for the normalized gain
//! u, and for u ~ Gamma(s, 1) the mean of ln(1 + SNR) is Σ_{j<s} f_j(c) with
//! f_j(c) = c^j e^c Γ(−j, c) and c = ψ·scale. The Rician stream is a Poisson
//! mixture of such Gamma laws, giving one positive outer series.

use super::cdf::{RicianStreamLaw, StreamLaw};
use super::{check_stage, EffectiveNoiseParams, MetricsError, Result};
use crate::channel::SystemConfig;
use crate::quad::{integrate, QuadOptions};
use crate::specfun::{exp_gamma_neg_sequence, SeriesControl};
use crate::stage::{Detector, StageIndex};

/// Absolute gap that counts as agreement "to the third decimal".
pub const CONVERGENCE_TOLERANCE: f64 = 5e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capacity {
    /// Normalized capacity E[ln(1 + SNR)].
    pub value: f64,
    /// Outer series terms, finite-sum terms, or integrand evaluations.
    pub terms_used: usize,
}

impl Capacity {
    pub fn bps_hz(&self) -> f64 {
        self.value * (1.0 / std::f64::consts::LN_2)
    }
}

fn require_ideal_transmitter(config: &SystemConfig) -> Result<()> {
    if config.kappa_t != 0.0 {
        return Err(MetricsError::TransmitImpairment {
            kappa_t: config.kappa_t,
        });
    }
    Ok(())
}

/// f_j(c) for j < len, plus prefix sums S[s] = Σ_{j<s} f_j.
struct PrefixedSequence {
    c: f64,
    prefix: Vec<f64>,
}

impl PrefixedSequence {
    fn new(c: f64, len: usize) -> Result<Self> {
        let mut s = Self { c, prefix: Vec::new() };
        s.grow(len)?;
        Ok(s)
    }

    fn grow(&mut self, len: usize) -> Result<()> {
        let f = exp_gamma_neg_sequence(len.max(1) - 1, self.c)?;
        self.prefix = std::iter::once(0.0)
            .chain(f.iter().scan(0.0, |acc, v| {
                *acc += v;
                Some(*acc)
            }))
            .collect();
        Ok(())
    }

    fn sum_below(&mut self, s: usize) -> Result<f64> {
        if s >= self.prefix.len() {
            self.grow(2 * s)?;
        }
        Ok(self.prefix[s])
    }
}

/// Partial sums C_T = Σ_{k<T} w_k S_{n+k}, stopped by a rigorous tail bound.
fn rician_partial_sums(config: &SystemConfig, ctrl: &SeriesControl) -> Result<(f64, Vec<f64>)> {
    require_ideal_transmitter(config)?;
    ctrl.validate()?;
    let noise = EffectiveNoiseParams::new(config, StageIndex::FIRST)?;
    let law = RicianStreamLaw::from_config(config)?;
    let c = noise.psi * noise.scale;
    let n = law.dof() as usize;
    let mu = 0.5 * law.lambda();
    let mut seq = PrefixedSequence::new(c, n + 64)?;
    let mut partials = Vec::new();
    let mut sum = 0.0;
    for k in 0..ctrl.max_terms {
        sum += law.ln_weight(k)?.exp() * seq.sum_below(n + k)?;
        partials.push(sum);
        // Remaining terms: S_j ≤ ln(1 + (n+j)/c) ≤ ln(1 + (n+t)/c) + (j−t)/(c+n+t),
        // with tail mass and excess bounded under Pois(μ).
        let t = k + 1;
        let mass = law.poisson_tail(t)?;
        let excess = (mu * mass - t as f64 * law.poisson_tail(t + 1)?).max(0.0);
        let tf = (n + t) as f64;
        let bound = mass * (tf / c).ln_1p() + excess / (c + tf);
        if bound <= ctrl.threshold(sum) {
            return Ok((sum, partials));
        }
    }
    Err(MetricsError::NonConvergence {
        func: "capacity_rician",
        terms: ctrl.max_terms,
    })
}

/// Closed-form capacity of the Rician stream (κ_T = 0 only).
pub fn capacity_rician(config: &SystemConfig, ctrl: &SeriesControl) -> Result<Capacity> {
    let (value, partials) = rician_partial_sums(config, ctrl)?;
    Ok(Capacity {
        value,
        terms_used: partials.len(),
    })
}

/// Closed-form capacity of Rayleigh stream `stage` under ZF-SIC.
pub fn capacity_rayleigh(config: &SystemConfig, stage: StageIndex) -> Result<Capacity> {
    if stage.is_rician() {
        return Err(MetricsError::RicianStage);
    }
    capacity(config, stage, Detector::ZfSic, &SeriesControl::default())
}

/// Closed-form capacity of any stream (κ_T = 0 only).
pub fn capacity(config: &SystemConfig, stage: StageIndex, detector: Detector, ctrl: &SeriesControl) -> Result<Capacity> {
    require_ideal_transmitter(config)?;
    check_stage(config, stage)?;
    if stage.is_rician() {
        return capacity_rician(config, ctrl);
    }
    let noise = EffectiveNoiseParams::new(config, stage)?;
    let dof = detector.dof(config.n_rx, config.n_tx, stage);
    let f = exp_gamma_neg_sequence(dof - 1, noise.psi * noise.scale)?;
    Ok(Capacity {
        value: f.iter().sum(),
        terms_used: dof,
    })
}

/// Capacity of stream `stage` under ZF-SIC by quadrature of
/// ∫ (1 − F_SNR(x))/(1 + x) dx over [0, 1/κ_T²).
pub fn capacity_numeric(config: &SystemConfig, stage: StageIndex) -> Result<Capacity> {
    capacity_numeric_for(config, stage, Detector::ZfSic)
}

pub fn capacity_numeric_for(config: &SystemConfig, stage: StageIndex, detector: Detector) -> Result<Capacity> {
    let noise = EffectiveNoiseParams::new(config, stage)?;
    let law = StreamLaw::for_stage(config, stage, detector)?;
    let gain = noise.psi * noise.scale;
    let k2 = noise.kappa_t_sq;
    // SNR values around the bulk of the law, used as breakpoints.
    let centre = law.mean() / gain;
    let marks = [0.25 * centre, centre, 4.0 * centre];

    let mut failure: Option<MetricsError> = None;
    let mut survival = |u: f64| match law.cdf(u) {
        Ok(v) => 1.0 - v,
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    };
    let opts = QuadOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-11,
        max_subdivisions: 4000,
    };
    let result = if k2 == 0.0 {
        // x = t/(1−t) maps [0, ∞) onto [0, 1).
        let breaks: Vec<f64> = marks.iter().map(|x| x / (1.0 + x)).collect();
        integrate(
            |t| {
                let x = t / (1.0 - t);
                survival(gain * x) / (1.0 - t)
            },
            0.0,
            1.0,
            &breaks,
            opts,
        )
    } else {
        let top = 1.0 / k2;
        let breaks: Vec<f64> = marks.iter().map(|x| x / (1.0 + k2 * x)).collect();
        integrate(
            |x| {
                let y = x / (1.0 - k2 * x);
                survival(gain * y) / (1.0 + x)
            },
            0.0,
            top,
            &breaks,
            opts,
        )
    };
    if let Some(e) = failure {
        return Err(e);
    }
    let q = result?;
    Ok(Capacity {
        value: q.value,
        terms_used: q.evaluations,
    })
}

/// Sum over all M streams. Closed forms when κ_T = 0, quadrature otherwise.
/// Under plain ZF, Rayleigh streams with equal path gains share one value,
/// so the sum is C₁ + (M−1)·C₂ exactly in the symmetric case.
pub fn sum_capacity(config: &SystemConfig, detector: Detector, ctrl: &SeriesControl) -> Result<Capacity> {
    config.validate()?;
    let per_stream = |stage: StageIndex| {
        if config.kappa_t == 0.0 {
            capacity(config, stage, detector, ctrl)
        } else {
            capacity_numeric_for(config, stage, detector)
        }
    };
    let first = per_stream(StageIndex::FIRST)?;
    let mut total = first;
    match detector {
        Detector::ZfSic => {
            for stage in StageIndex::all(config.n_tx).skip(1) {
                let c = per_stream(stage)?;
                total.value += c.value;
                total.terms_used += c.terms_used;
            }
        }
        Detector::Zf => {
            let mut groups: Vec<(f64, usize, StageIndex)> = Vec::new();
            for stage in StageIndex::all(config.n_tx).skip(1) {
                let g = config.path_gain(stage.get() - 1);
                match groups.iter_mut().find(|(gain, _, _)| *gain == g) {
                    Some(entry) => entry.1 += 1,
                    None => groups.push((g, 1, stage)),
                }
            }
            for (_, count, stage) in groups {
                let c = per_stream(stage)?;
                total.value += count as f64 * c.value;
                total.terms_used += c.terms_used;
            }
        }
    }
    Ok(total)
}

/// How many outer terms of the Rician capacity series are needed.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n_rx: usize,
    pub n_tx: usize,
    /// Converged normalized capacity.
    pub capacity: f64,
    /// Smallest T with capacity − C_T < [`CONVERGENCE_TOLERANCE`].
    pub terms_converged: usize,
    /// Smallest T with C_T and C_{T+5} equal after rounding to 3 decimals.
    pub terms_lookahead: usize,
    /// C_1, C_2, … up to convergence.
    pub partial_sums: Vec<f64>,
}

pub fn convergence_row(config: &SystemConfig) -> Result<ConvergenceRow> {
    let ctrl = SeriesControl {
        rel_tol: 1e-14,
        abs_tol: 1e-14,
        max_terms: 1_000_000,
    };
    let (capacity, partial_sums) = rician_partial_sums(config, &ctrl)?;
    let at = |t: usize| partial_sums.get(t - 1).copied().unwrap_or(capacity);
    let len = partial_sums.len();
    let terms_converged = (1..=len)
        .find(|&t| capacity - at(t) < CONVERGENCE_TOLERANCE)
        .unwrap_or(len);
    let round3 = |v: f64| (v * 1000.0).round();
    let terms_lookahead = (1..=len)
        .find(|&t| round3(at(t)) == round3(at(t + 5)))
        .unwrap_or(len);
    Ok(ConvergenceRow {
        n_rx: config.n_rx,
        n_tx: config.n_tx,
        capacity,
        terms_converged,
        terms_lookahead,
        partial_sums,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bps_conversion() {
        let c = Capacity {
            value: std::f64::consts::LN_2,
            terms_used: 1,
        };
        assert!((c.bps_hz() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn transmit_impairment_rejected() {
        let c = SystemConfig::symmetric(8, 4).with_kappa(0.1);
        assert!(matches!(
            capacity_rician(&c, &SeriesControl::default()),
            Err(MetricsError::TransmitImpairment { .. })
        ));
    }

    #[test]
    fn rayleigh_rician_limit() {
        // K = 0 makes stream 1 a Gamma(N−M+1) law like a plain-ZF Rayleigh stream.
        let c = SystemConfig::symmetric(8, 4);
        let s2 = StageIndex::new(2, 4).unwrap();
        let a = capacity_rician(&c, &SeriesControl::default()).unwrap().value;
        let b = capacity(&c, s2, Detector::Zf, &SeriesControl::default()).unwrap().value;
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn table_reference_capacity() {
        let c = SystemConfig::symmetric(8, 4).with_k_db(6.0);
        let row = convergence_row(&c).unwrap();
        assert!((row.capacity - 3.872_094_580_452_083).abs() < 1e-9, "{}", row.capacity);
        assert!(row.partial_sums.windows(2).all(|w| w[1] >= w[0]));
    }
}
