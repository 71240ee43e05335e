//! Distributional checks of the post-ZF gain: direct sampling of the
//! Beta-mixed non-central chi-square law and Kolmogorov–Smirnov distances.

use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};

use super::linalg::{deflate, Gram};
use super::{run_trials, with_channel, Result};
use crate::channel::SystemConfig;
use crate::stage::{Detector, StageIndex};

/// Samples of 2(K+1)Y_i/d_i^{−α_i}, Y_i = 1/[(HᴴH)⁻¹]_{ii} on the matrix
/// visible at `stage`. Chi-square with 2(N−M+i) (ZF-SIC) degrees of freedom
/// for Rayleigh streams.
pub fn sample_normalized_gain(
    config: &SystemConfig,
    stage: StageIndex,
    detector: Detector,
    trials: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    config.validate()?;
    let first = detector.first_column(stage);
    let des = stage.get() - 1 - first;
    let scale = 2.0 * (config.rician_k + 1.0) / config.path_gain(stage.get() - 1);
    let s = run_trials(trials, seed, |rng| {
        with_channel(config, rng, false, |real| {
            let gram = Gram::new(&deflate(&real.h_true, first))?;
            Ok(scale / gram.inverse_diag(des))
        })
    })?;
    Ok(s.values)
}

/// Direct draws of χ'²_{2n}(λβ) with β ~ Beta(n, M−1), n = N−M+1, λ = 2NK
/// (β = 1 when M = 1).
pub fn sample_lemma_mixture(config: &SystemConfig, trials: u64, seed: u64) -> Result<Vec<f64>> {
    config.validate()?;
    let n = config.n_rx - config.n_tx + 1;
    let lambda = 2.0 * config.n_rx as f64 * config.rician_k;
    let beta = (config.n_tx > 1).then(|| Beta::new(n as f64, (config.n_tx - 1) as f64).expect("positive shape parameters"));
    let s = run_trials(trials, seed, |rng| {
        let b = beta.as_ref().map_or(1.0, |d| d.sample(rng));
        let shift = (lambda * b).sqrt();
        let mut x = 0.0;
        for i in 0..2 * n {
            let z: f64 = rng.sample(StandardNormal);
            let z = if i == 0 { z + shift } else { z };
            x += z * z;
        }
        Ok((x, 0))
    })?;
    Ok(s.values)
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// sup |F_a − F_b| between two empirical CDFs.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (sorted(a), sorted(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// sup |F_n − F| against a continuous CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let s = sorted(samples);
    let n = s.len() as f64;
    s.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n)
    })
}

fn ks_coefficient(alpha: f64) -> f64 {
    (-0.5 * (0.5 * alpha).ln()).sqrt()
}

/// Asymptotic two-sample critical value at level α.
pub fn ks_critical_two_sample(alpha: f64, n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    ks_coefficient(alpha) * ((n + m) / (n * m)).sqrt()
}

/// Asymptotic one-sample critical value at level α.
pub fn ks_critical_one_sample(alpha: f64, n: usize) -> f64 {
    ks_coefficient(alpha) / (n as f64).sqrt()
}
