//! Rank-1 Rician multiuser uplink: scenario description, the deterministic
//! line-of-sight column, and random draws of the channel, the estimation
//! error and the distortion/noise sources.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("antenna counts must satisfy n_rx ≥ n_tx ≥ 1 (n_rx = {n_rx}, n_tx = {n_tx})")]
    Dimensions { n_rx: usize, n_tx: usize },
    #[error("{field} has {len} entries, expected one per user ({expected})")]
    Length {
        field: &'static str,
        len: usize,
        expected: usize,
    },
    #[error("{field} = {value} is out of range ({expected})")]
    Range {
        field: &'static str,
        value: f64,
        expected: &'static str,
    },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChannelError {
    #[error("estimation-error matrix was not sampled for this realization")]
    MissingOmega,
    #[error("sigma_est = {0} must lie in [0, 1]")]
    Sigma(f64),
}

/// dB to linear power ratio; −∞ dB maps to exactly 0.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Rician K-factor from dB (−∞ dB gives pure Rayleigh, K = 0).
pub fn k_from_db(db: f64) -> f64 {
    db_to_linear(db)
}

/// Full scenario description. User 1 (index 0) carries the LOS component.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub n_rx: usize,
    pub n_tx: usize,
    /// Linear K-factor.
    pub rician_k: f64,
    pub distances: Vec<f64>,
    pub pathloss_exps: Vec<f64>,
    pub sigma_est: f64,
    pub kappa_t: f64,
    pub kappa_r: f64,
    /// p/N₀ in dB.
    pub snr_db: f64,
    pub noise_power: f64,
    pub arrival_angle_deg: f64,
    pub antenna_spacing_wavelengths: f64,
}

impl SystemConfig {
    /// Identical users at unit distance with α = 4, no impairments, K = 0,
    /// p/N₀ = 10 dB, N₀ = 1, φ = 20° and half-wavelength spacing.
    pub fn symmetric(n_rx: usize, n_tx: usize) -> Self {
        Self {
            n_rx,
            n_tx,
            rician_k: 0.0,
            distances: vec![1.0; n_tx],
            pathloss_exps: vec![4.0; n_tx],
            sigma_est: 0.0,
            kappa_t: 0.0,
            kappa_r: 0.0,
            snr_db: 10.0,
            noise_power: 1.0,
            arrival_angle_deg: 20.0,
            antenna_spacing_wavelengths: 0.5,
        }
    }

    pub fn with_k_db(mut self, k_db: f64) -> Self {
        self.rician_k = k_from_db(k_db);
        self
    }

    pub fn with_snr_db(mut self, snr_db: f64) -> Self {
        self.snr_db = snr_db;
        self
    }

    pub fn with_sigma_est(mut self, sigma: f64) -> Self {
        self.sigma_est = sigma;
        self
    }

    /// Sets κ_T = κ_R = κ.
    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa_t = kappa;
        self.kappa_r = kappa;
        self
    }

    pub fn with_kappas(mut self, kappa_t: f64, kappa_r: f64) -> Self {
        self.kappa_t = kappa_t;
        self.kappa_r = kappa_r;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_tx == 0 || self.n_rx < self.n_tx {
            return Err(ConfigError::Dimensions {
                n_rx: self.n_rx,
                n_tx: self.n_tx,
            });
        }
        for (field, v) in [("distances", &self.distances), ("pathloss_exps", &self.pathloss_exps)] {
            if v.len() != self.n_tx {
                return Err(ConfigError::Length {
                    field,
                    len: v.len(),
                    expected: self.n_tx,
                });
            }
        }
        let range = |field: &'static str, value: f64, ok: bool, expected: &'static str| {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::Range { field, value, expected })
            }
        };
        for &d in &self.distances {
            range("distances", d, d > 0.0 && d.is_finite(), "> 0")?;
        }
        for &a in &self.pathloss_exps {
            range("pathloss_exps", a, (2.0..=6.0).contains(&a), "[2, 6]")?;
        }
        let k = self.rician_k;
        range("rician_k", k, k >= 0.0 && k.is_finite(), "≥ 0, finite")?;
        let s = self.sigma_est;
        range("sigma_est", s, (0.0..=1.0).contains(&s), "[0, 1]")?;
        let kt = self.kappa_t;
        range("kappa_t", kt, kt >= 0.0 && kt.is_finite(), "≥ 0")?;
        let kr = self.kappa_r;
        range("kappa_r", kr, kr >= 0.0 && kr.is_finite(), "≥ 0")?;
        range("snr_db", self.snr_db, self.snr_db.is_finite(), "finite")?;
        let n0 = self.noise_power;
        range("noise_power", n0, n0 > 0.0 && n0.is_finite(), "> 0")?;
        let phi = self.arrival_angle_deg;
        range("arrival_angle_deg", phi, phi.is_finite(), "finite")?;
        let dl = self.antenna_spacing_wavelengths;
        range("antenna_spacing_wavelengths", dl, dl > 0.0 && dl.is_finite(), "> 0")?;
        Ok(())
    }

    /// Transmit power p = N₀ · 10^{snr_db/10}.
    pub fn transmit_power(&self) -> f64 {
        self.noise_power * db_to_linear(self.snr_db)
    }

    /// d_i^{−α_i} for user index `user` (0-based).
    pub fn path_gain(&self, user: usize) -> f64 {
        self.distances[user].powf(-self.pathloss_exps[user])
    }

    /// Per-entry variance of the scattered part, d_i^{−α_i}/(K+1).
    pub fn scatter_variance(&self, user: usize) -> f64 {
        self.path_gain(user) / (self.rician_k + 1.0)
    }
}

/// One channel draw.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// N×M true channel H = H_d + H_r.
    pub h_true: DMatrix<Complex64>,
    /// LOS column h_d of user 1; the other columns of H_d are zero.
    pub h_det: DVector<Complex64>,
    /// Unit-variance estimation error Ω, when requested.
    pub omega: Option<DMatrix<Complex64>>,
}

impl ChannelRealization {
    /// The deterministic matrix H_d = [h_d, 0, …, 0].
    pub fn h_det_matrix(&self) -> DMatrix<Complex64> {
        let mut hd = DMatrix::zeros(self.h_true.nrows(), self.h_true.ncols());
        hd.set_column(0, &self.h_det);
        hd
    }
}

/// Circularly-symmetric complex Gaussian with E|x|² = variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, len: usize, variance: f64) -> DVector<Complex64> {
    if variance == 0.0 {
        return DVector::zeros(len);
    }
    DVector::from_fn(len, |_, _| complex_gaussian(rng, variance))
}

/// LOS array response of user 1: entry q (0-based) is
/// √(d₁^{−α₁} K/(K+1)) · exp(−j q 2π (D/λ) sin φ).
pub fn steering_vector(config: &SystemConfig) -> DVector<Complex64> {
    let k = config.rician_k;
    let amplitude = (config.path_gain(0) * k / (k + 1.0)).sqrt();
    let step = 2.0 * std::f64::consts::PI * config.antenna_spacing_wavelengths * config.arrival_angle_deg.to_radians().sin();
    DVector::from_fn(config.n_rx, |q, _| Complex64::from_polar(amplitude, -(q as f64) * step))
}

/// Draws H = H_d + H_r, and Ω when `with_omega` is set.
///
/// Draw order is fixed (H_r column-major, then Ω column-major), so equal
/// generator states give bit-identical realizations.
pub fn sample_channel<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R, with_omega: bool) -> ChannelRealization {
    let (n, m) = (config.n_rx, config.n_tx);
    let h_det = steering_vector(config);
    let mut h = DMatrix::zeros(n, m);
    for col in 0..m {
        let var = config.scatter_variance(col);
        for row in 0..n {
            h[(row, col)] = complex_gaussian(rng, var);
        }
    }
    for row in 0..n {
        h[(row, 0)] += h_det[row];
    }
    let omega = with_omega.then(|| DMatrix::from_fn(n, m, |_, _| complex_gaussian(rng, 1.0)));
    ChannelRealization {
        h_true: h,
        h_det,
        omega,
    }
}

/// Ĥ = H + σΩ. With σ = 0 this is H itself and Ω is not needed.
pub fn estimated_channel(real: &ChannelRealization, sigma_est: f64) -> Result<DMatrix<Complex64>, ChannelError> {
    if !(0.0..=1.0).contains(&sigma_est) {
        return Err(ChannelError::Sigma(sigma_est));
    }
    if sigma_est == 0.0 {
        return Ok(real.h_true.clone());
    }
    let omega = real.omega.as_ref().ok_or(ChannelError::MissingOmega)?;
    Ok(&real.h_true + omega * Complex64::new(sigma_est, 0.0))
}

/// Transmit distortion, receive distortion and thermal noise for one symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSources {
    /// n_T ~ CN(0, p κ_T² I_M).
    pub n_t: DVector<Complex64>,
    /// n_R ~ CN(0, p κ_R² M I_N).
    pub n_r: DVector<Complex64>,
    /// w ~ CN(0, N₀ I_N).
    pub w: DVector<Complex64>,
}

pub fn sample_noise_sources<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> NoiseSources {
    let p = config.transmit_power();
    let (n, m) = (config.n_rx, config.n_tx);
    let n_t = gaussian_vector(rng, m, p * config.kappa_t.powi(2));
    let n_r = gaussian_vector(rng, n, p * config.kappa_r.powi(2) * m as f64);
    let w = gaussian_vector(rng, n, config.noise_power);
    NoiseSources { n_t, n_r, w }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn steering_examples() {
        let cfg = SystemConfig::symmetric(4, 2);
        assert!(steering_vector(&cfg).iter().all(|z| *z == Complex64::new(0.0, 0.0)));

        let mut cfg = SystemConfig::symmetric(4, 2).with_k_db(3.0);
        cfg.arrival_angle_deg = 0.0;
        let a = (cfg.rician_k / (cfg.rician_k + 1.0)).sqrt();
        for z in steering_vector(&cfg).iter() {
            assert!((z.re - a).abs() < 1e-15 && z.im.abs() < 1e-15);
        }

        let mut cfg = SystemConfig::symmetric(2, 1);
        cfg.rician_k = 1.0;
        let v = steering_vector(&cfg);
        assert!((v[1].arg() + 1.074_487_969_651_649).abs() < 1e-12);
        assert!((v[1].norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn validation_rejects_bad_fields() {
        assert!(SystemConfig::symmetric(4, 4).validate().is_ok());
        assert!(matches!(SystemConfig::symmetric(3, 4).validate(), Err(ConfigError::Dimensions { .. })));
        let mut c = SystemConfig::symmetric(4, 2);
        c.distances.pop();
        assert!(matches!(c.validate(), Err(ConfigError::Length { field: "distances", .. })));
        let c = SystemConfig::symmetric(4, 2).with_sigma_est(1.5);
        assert!(matches!(c.validate(), Err(ConfigError::Range { field: "sigma_est", .. })));
        let mut c = SystemConfig::symmetric(4, 2);
        c.pathloss_exps[1] = 7.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn k_minus_infinity_is_rayleigh() {
        assert_eq!(k_from_db(f64::NEG_INFINITY), 0.0);
        assert!((k_from_db(10.0) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn rank_one_and_reproducible() {
        let cfg = SystemConfig::symmetric(6, 3).with_k_db(7.0);
        let a = sample_channel(&cfg, &mut ChaCha8Rng::seed_from_u64(9), true);
        let b = sample_channel(&cfg, &mut ChaCha8Rng::seed_from_u64(9), true);
        assert_eq!(a, b);
        let hd = a.h_det_matrix();
        let nonzero_cols = (0..3).filter(|&c| hd.column(c).iter().any(|z| z.norm() > 0.0)).count();
        assert_eq!(nonzero_cols, 1);
    }

    #[test]
    fn estimated_channel_cases() {
        let cfg = SystemConfig::symmetric(4, 2);
        let real = sample_channel(&cfg, &mut ChaCha8Rng::seed_from_u64(1), false);
        assert_eq!(estimated_channel(&real, 0.0).unwrap(), real.h_true);
        assert_eq!(estimated_channel(&real, 0.1), Err(ChannelError::MissingOmega));

        let mut real = sample_channel(&cfg, &mut ChaCha8Rng::seed_from_u64(1), true);
        real.h_true = DMatrix::zeros(4, 2);
        assert_eq!(estimated_channel(&real, 1.0).unwrap(), real.omega.clone().unwrap());
    }

    #[test]
    fn ideal_hardware_has_no_distortion() {
        let cfg = SystemConfig::symmetric(4, 2);
        let ns = sample_noise_sources(&cfg, &mut ChaCha8Rng::seed_from_u64(3));
        assert!(ns.n_t.iter().all(|z| z.norm() == 0.0));
        assert!(ns.n_r.iter().all(|z| z.norm() == 0.0));
        assert!(ns.w.iter().any(|z| z.norm() > 0.0));
    }
}
