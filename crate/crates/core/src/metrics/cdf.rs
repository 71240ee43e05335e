//! Laws of the post-detection gain Y_i = 1/[(HᴴH)⁻¹]_{ii} and the derived
//! SNR CDFs and outage probabilities.
//!
//! Everything is evaluated on the normalized variable u = (K+1)Y_i/d_i^{−α_i},
//! for which 2u is chi-square with 2·dof degrees of freedom (Rayleigh
//! streams) or non-central chi-square with a Beta-distributed non-centrality
//! λβ, λ = 2NK, β ~ Beta(N−M+1, M−1) (the Rician stream).

use std::sync::OnceLock;

use super::{check_stage, clamp_probability, EffectiveNoiseParams, MetricsError, Result};
use crate::channel::SystemConfig;
use crate::specfun::{
    gamma_p, ln_beta, ln_gamma, ln_kummer_1f1_positive, marcum_integral_pair, marcum_q_complement,
    regularized_step_ln,
};
use crate::stage::{Detector, StageIndex};

/// Tail mass below which the mixing weights are truncated.
const WEIGHT_TAIL: f64 = 1e-17;

/// Condition number (Σ|terms| / |sum|) above which the alternating finite
/// sum is abandoned for the positive Poisson series.
const MAX_CANCELLATION: f64 = 1e3;

/// Beyond u = UPPER_TAIL_OFFSET + UPPER_TAIL_FACTOR·E[u] the series route is
/// used directly; the Marcum integrals there need O(u) terms.
const UPPER_TAIL_OFFSET: f64 = 50.0;
const UPPER_TAIL_FACTOR: f64 = 4.0;

/// Law of the normalized Rician-stream gain.
///
/// Two routes are provided: the alternating finite sum over Beta moments
/// (each term a Marcum-Q integral) and a positive Poisson-mixture series
/// Σ_k w_k P(dof+k, u).
#[derive(Debug, Clone)]
pub struct RicianStreamLaw {
    dof: u32,
    mix: u32,
    lambda: f64,
    weights: OnceLock<std::result::Result<Vec<f64>, MetricsError>>,
}

impl RicianStreamLaw {
    /// `dof` = N−M+1, `mix` = M−1 (0 means no Beta mixing), `lambda` = 2NK.
    pub fn new(dof: u32, mix: u32, lambda: f64) -> Result<Self> {
        if dof == 0 {
            return Err(MetricsError::Domain {
                what: "dof",
                value: 0.0,
            });
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(MetricsError::Domain {
                what: "lambda",
                value: lambda,
            });
        }
        Ok(Self {
            dof,
            mix,
            lambda,
            weights: OnceLock::new(),
        })
    }

    pub fn from_config(config: &SystemConfig) -> Result<Self> {
        config.validate()?;
        let (n, m) = (config.n_rx, config.n_tx);
        Self::new((n - m + 1) as u32, (m - 1) as u32, 2.0 * n as f64 * config.rician_k)
    }

    pub fn dof(&self) -> u32 {
        self.dof
    }

    pub fn mix(&self) -> u32 {
        self.mix
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// E[u].
    pub fn mean(&self) -> f64 {
        let n = self.dof as f64;
        let mu = 0.5 * self.lambda;
        n + mu * n / (n + self.mix as f64)
    }

    /// ln w_k, where w_k = E_β[Pois(k; λβ/2)].
    pub fn ln_weight(&self, k: usize) -> Result<f64> {
        let mu = 0.5 * self.lambda;
        let kf = k as f64;
        if mu == 0.0 {
            return Ok(if k == 0 { 0.0 } else { f64::NEG_INFINITY });
        }
        let poisson = kf * mu.ln() - mu - ln_gamma(kf + 1.0);
        if self.mix == 0 {
            return Ok(poisson);
        }
        let (n, b) = (self.dof as f64, self.mix as f64);
        // E[β^k e^{−μβ}] = B(n+k,b)/B(n,b) · e^{−μ} ₁F₁(b; n+k+b; μ)
        Ok(poisson + ln_beta(n + kf, b) - ln_beta(n, b) + ln_kummer_1f1_positive(b, n + kf + b, mu)?)
    }

    /// Upper bound on Σ_{k ≥ t} w_k: the mixture is stochastically below
    /// Pois(λ/2), whose tail is P(t, λ/2).
    pub fn poisson_tail(&self, t: usize) -> Result<f64> {
        if t == 0 {
            return Ok(1.0);
        }
        Ok(gamma_p(t as f64, 0.5 * self.lambda)?)
    }

    /// Mixing weights w_0.. truncated once the remaining mass is below 1e-17.
    pub fn weights(&self) -> Result<&[f64]> {
        self.weights
            .get_or_init(|| {
                let mu = 0.5 * self.lambda;
                let mut w = Vec::new();
                loop {
                    let k = w.len();
                    w.push(self.ln_weight(k)?.exp());
                    if (k as f64) >= mu && self.poisson_tail(k + 1)? < WEIGHT_TAIL {
                        return Ok(w);
                    }
                    if k > 10_000_000 {
                        return Err(MetricsError::NonConvergence {
                            func: "rician_weights",
                            terms: k,
                        });
                    }
                }
            })
            .as_ref()
            .map(Vec::as_slice)
            .map_err(Clone::clone)
    }

    /// F(u), choosing the finite sum unless it cancels badly or u lies far
    /// in the upper tail.
    pub fn cdf(&self, u: f64) -> Result<f64> {
        if let Some(v) = self.trivial_cdf(u)? {
            return Ok(v);
        }
        if u > UPPER_TAIL_OFFSET + UPPER_TAIL_FACTOR * self.mean() {
            return self.cdf_series(u);
        }
        // Cancellation, or Marcum arguments beyond the series budget at very
        // large noncentrality, both fall back to the mixture series.
        match self.finite_sum_terms(u) {
            Ok((value, abs_sum)) if value > 0.0 && abs_sum <= MAX_CANCELLATION * value => Ok(value.min(1.0)),
            _ => self.cdf_series(u),
        }
    }

    /// Σ|terms| / |sum| of the finite sum at u; 1 when no cancellation occurs.
    pub fn finite_sum_condition(&self, u: f64) -> Result<f64> {
        if self.trivial_cdf(u)?.is_some() {
            return Ok(1.0);
        }
        let (value, abs_sum) = self.finite_sum_terms(u)?;
        Ok(if value > 0.0 { abs_sum / value } else { f64::INFINITY })
    }

    /// Threshold on [`Self::finite_sum_condition`] above which `cdf` uses
    /// the series.
    pub const MAX_CANCELLATION: f64 = MAX_CANCELLATION;

    /// F(u) = (1/B(n, M−1)) Σ_j (−1)^j C(M−2, j) J̄_λ(n−1+j, n, √(2u)).
    pub fn cdf_finite_sum(&self, u: f64) -> Result<f64> {
        match self.trivial_cdf(u)? {
            Some(v) => Ok(v),
            None => Ok(self.finite_sum_terms(u)?.0.min(1.0)),
        }
    }

    /// F(u) = Σ_k w_k P(n+k, u).
    pub fn cdf_series(&self, u: f64) -> Result<f64> {
        if let Some(v) = self.trivial_cdf_base(u)? {
            return Ok(v);
        }
        let w = self.weights()?;
        let n = self.dof as f64;
        let top = w.len() - 1;
        // P(a, u) = P(a+1, u) + u^a e^{−u}/Γ(a+1): walk downward adding
        // positive steps.
        let mut p = gamma_p(n + top as f64, u)?;
        let mut sum = w[top] * p;
        for k in (0..top).rev() {
            p += regularized_step_ln(n + k as f64, u).exp();
            sum += w[k] * p.min(1.0);
        }
        // Weights sum to one only up to rounding.
        Ok(sum.min(1.0))
    }

    fn trivial_cdf_base(&self, u: f64) -> Result<Option<f64>> {
        if !(u >= 0.0) {
            return Err(MetricsError::Domain {
                what: "normalized gain",
                value: u,
            });
        }
        if u == 0.0 {
            return Ok(Some(0.0));
        }
        if u.is_infinite() {
            return Ok(Some(1.0));
        }
        if self.lambda == 0.0 {
            return Ok(Some(gamma_p(self.dof as f64, u)?));
        }
        Ok(None)
    }

    fn trivial_cdf(&self, u: f64) -> Result<Option<f64>> {
        if let Some(v) = self.trivial_cdf_base(u)? {
            return Ok(Some(v));
        }
        if self.mix == 0 {
            return Ok(Some(marcum_q_complement(self.dof, self.lambda.sqrt(), (2.0 * u).sqrt())?));
        }
        Ok(None)
    }

    /// (value, Σ|terms|), both already divided by the Beta function.
    fn finite_sum_terms(&self, u: f64) -> Result<(f64, f64)> {
        let b = (2.0 * u).sqrt();
        let n = self.dof as f64;
        let r = self.mix - 1;
        let inv_beta = (-ln_beta(n, self.mix as f64)).exp();
        let mut binom = 1.0;
        let (mut sum, mut abs_sum) = (0.0, 0.0);
        for j in 0..=r {
            let (_, jbar) = marcum_integral_pair(n - 1.0 + j as f64, self.dof, b, self.lambda)?;
            let t = binom * jbar;
            sum += if j % 2 == 0 { t } else { -t };
            abs_sum += t;
            binom = binom * (r - j) as f64 / (j + 1) as f64;
        }
        Ok((sum * inv_beta, abs_sum * inv_beta))
    }
}

/// Law of a stream's normalized gain under a given detector.
#[derive(Debug, Clone)]
pub enum StreamLaw {
    Rician(RicianStreamLaw),
    /// Central: u ~ Gamma(shape, 1).
    Gamma { shape: u32 },
}

impl StreamLaw {
    pub fn for_stage(config: &SystemConfig, stage: StageIndex, detector: Detector) -> Result<Self> {
        check_stage(config, stage)?;
        if stage.is_rician() {
            return Ok(StreamLaw::Rician(RicianStreamLaw::from_config(config)?));
        }
        Ok(StreamLaw::Gamma {
            shape: detector.dof(config.n_rx, config.n_tx, stage) as u32,
        })
    }

    pub fn cdf(&self, u: f64) -> Result<f64> {
        match self {
            StreamLaw::Rician(law) => law.cdf(u),
            StreamLaw::Gamma { shape } => {
                if !(u >= 0.0) {
                    return Err(MetricsError::Domain {
                        what: "normalized gain",
                        value: u,
                    });
                }
                Ok(gamma_p(*shape as f64, u)?)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            StreamLaw::Rician(law) => law.mean(),
            StreamLaw::Gamma { shape } => *shape as f64,
        }
    }
}

fn check_nonnegative(what: &'static str, x: f64) -> Result<()> {
    if x >= 0.0 {
        Ok(())
    } else {
        Err(MetricsError::Domain { what, value: x })
    }
}

/// F_{Y_i}(x) for the stream detected at `stage`.
pub fn y_cdf(config: &SystemConfig, stage: StageIndex, detector: Detector, x: f64) -> Result<f64> {
    check_nonnegative("x", x)?;
    let noise = EffectiveNoiseParams::new(config, stage)?;
    let law = StreamLaw::for_stage(config, stage, detector)?;
    clamp_probability("y_cdf", law.cdf(noise.scale * x)?)
}

/// F_{Y_1}(x) of the Rician stream.
pub fn y_cdf_rician(config: &SystemConfig, x: f64) -> Result<f64> {
    y_cdf(config, StageIndex::FIRST, Detector::ZfSic, x)
}

/// F_{Y_1}(x) forced through the alternating finite sum.
pub fn y_cdf_rician_finite_sum(config: &SystemConfig, x: f64) -> Result<f64> {
    rician_route(config, x, RicianStreamLaw::cdf_finite_sum)
}

/// F_{Y_1}(x) forced through the Poisson-mixture series.
pub fn y_cdf_rician_series(config: &SystemConfig, x: f64) -> Result<f64> {
    rician_route(config, x, RicianStreamLaw::cdf_series)
}

fn rician_route(config: &SystemConfig, x: f64, route: fn(&RicianStreamLaw, f64) -> Result<f64>) -> Result<f64> {
    check_nonnegative("x", x)?;
    let noise = EffectiveNoiseParams::new(config, StageIndex::FIRST)?;
    let law = RicianStreamLaw::from_config(config)?;
    clamp_probability("y_cdf_rician", route(&law, noise.scale * x)?)
}

/// F_{Y_i}(x) of a Rayleigh stream under ZF-SIC: P(N−M+i, (K+1)x/d_i^{−α_i}).
pub fn y_cdf_rayleigh(config: &SystemConfig, stage: StageIndex, x: f64) -> Result<f64> {
    if stage.is_rician() {
        return Err(MetricsError::RicianStage);
    }
    y_cdf(config, stage, Detector::ZfSic, x)
}

/// SNR CDF of stream `stage` under ZF-SIC.
pub fn snr_cdf(config: &SystemConfig, stage: StageIndex, x: f64) -> Result<f64> {
    snr_cdf_for(config, stage, Detector::ZfSic, x)
}

/// SNR CDF: F_Y(ψ x / (1 − κ_T² x)), and 1 beyond the 1/κ_T² ceiling.
pub fn snr_cdf_for(config: &SystemConfig, stage: StageIndex, detector: Detector, x: f64) -> Result<f64> {
    check_nonnegative("snr", x)?;
    let noise = EffectiveNoiseParams::new(config, stage)?;
    snr_cdf_with(config, stage, detector, &noise, x)
}

fn snr_cdf_with(
    config: &SystemConfig,
    stage: StageIndex,
    detector: Detector,
    noise: &EffectiveNoiseParams,
    x: f64,
) -> Result<f64> {
    match noise.y_threshold(x) {
        None => Ok(1.0),
        Some(y) => {
            let law = StreamLaw::for_stage(config, stage, detector)?;
            clamp_probability("snr_cdf", law.cdf(noise.scale * y)?)
        }
    }
}

/// Outage probability of stream `stage` under `detector` at threshold γ_th.
pub fn outage(config: &SystemConfig, stage: StageIndex, detector: Detector, gamma_th: f64) -> Result<f64> {
    check_nonnegative("gamma_th", gamma_th)?;
    snr_cdf_for(config, stage, detector, gamma_th)
}

pub fn outage_rician(config: &SystemConfig, gamma_th: f64) -> Result<f64> {
    outage(config, StageIndex::FIRST, Detector::ZfSic, gamma_th)
}

pub fn outage_rayleigh(config: &SystemConfig, stage: StageIndex, gamma_th: f64) -> Result<f64> {
    if stage.is_rician() {
        return Err(MetricsError::RicianStage);
    }
    outage(config, stage, Detector::ZfSic, gamma_th)
}

/// High-SNR outage floor under ZF-SIC: the outage with N₀/p dropped.
pub fn outage_floor(config: &SystemConfig, stage: StageIndex, gamma_th: f64) -> Result<f64> {
    outage_floor_for(config, stage, Detector::ZfSic, gamma_th)
}

pub fn outage_floor_for(config: &SystemConfig, stage: StageIndex, detector: Detector, gamma_th: f64) -> Result<f64> {
    check_nonnegative("gamma_th", gamma_th)?;
    let noise = EffectiveNoiseParams::floor(config, stage)?;
    snr_cdf_with(config, stage, detector, &noise, gamma_th)
}
