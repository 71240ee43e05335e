//! Test-side oracles that share no code with the library: composite
//! tanh-sinh quadrature and a log-space Bessel power series.

#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

/// ∫ f over [lo, hi] by tanh-sinh on `pieces` equal panels.
pub fn integrate(f: impl Fn(f64) -> f64, lo: f64, hi: f64, pieces: usize) -> f64 {
    let width = (hi - lo) / pieces as f64;
    (0..pieces)
        .map(|p| {
            let a = lo + p as f64 * width;
            tanh_sinh(&f, a, a + width)
        })
        .sum()
}

fn tanh_sinh(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const H: f64 = 1.0 / 32.0;
    const K_MAX: i32 = 110;
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut sum = FRAC_PI_2 * f(mid);
    for k in 1..=K_MAX {
        let t = k as f64 * H;
        let u = FRAC_PI_2 * t.sinh();
        let w = FRAC_PI_2 * t.cosh() / u.cosh().powi(2);
        if w < 1e-300 {
            break;
        }
        // Distance from each endpoint, without forming 1 − tanh(u).
        let gap = 2.0 * half / ((2.0 * u).exp() + 1.0);
        let (xl, xr) = (a + gap, b - gap);
        let mut s = 0.0;
        if xl > a {
            s += f(xl);
        }
        if xr < b {
            s += f(xr);
        }
        sum += w * s;
    }
    H * half * sum
}

/// ln k! for k = 0..=n.
fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// ln I_ν(x), x > 0, from Σ_k (x/2)^{2k+ν} / (k!(k+ν)!) summed in log space.
pub fn ln_bessel_i(nu: u32, x: f64) -> f64 {
    assert!(x > 0.0);
    let kmax = (x + 20.0 * x.sqrt() + 60.0) as usize;
    let lf = ln_factorials(kmax + nu as usize + 1);
    let lh = (0.5 * x).ln();
    let terms: Vec<f64> = (0..=kmax)
        .map(|k| (2 * k + nu as usize) as f64 * lh - lf[k] - lf[k + nu as usize])
        .collect();
    let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
}

/// Q_{μ,ν}(a,b) = ∫_b^∞ x^μ e^{−(x²+a²)/2} I_ν(ax) dx.
pub fn nuttall_q(mu: f64, nu: u32, a: f64, b: f64) -> f64 {
    let hi = b.max(a + mu.sqrt()) + 40.0;
    let f = |x: f64| {
        if x <= 0.0 {
            return 0.0;
        }
        (mu * x.ln() - 0.5 * (x * x + a * a) + ln_bessel_i(nu, a * x)).exp()
    };
    integrate(f, b, hi, ((hi - b) / 2.0).ceil() as usize)
}

/// Q_m(a,b) = a^{1−m} Q_{m,m−1}(a,b), a > 0.
pub fn marcum_q(m: u32, a: f64, b: f64) -> f64 {
    nuttall_q(m as f64, m - 1, a, b) / a.powi(m as i32 - 1)
}

/// Γ(s, x) = ∫_x^∞ t^{s−1} e^{−t} dt, x > 0.
pub fn gamma_upper(s: f64, x: f64) -> f64 {
    // Geometric panels resolve the t^{s−1} spike near small x.
    let mut edges = vec![x];
    let mut e = x;
    while e < x + 80.0 + s.abs() {
        e = (2.0 * e).min(e + 4.0);
        edges.push(e);
    }
    edges
        .windows(2)
        .map(|w| integrate(|t| ((s - 1.0) * t.ln() - t).exp(), w[0], w[1], 1))
        .sum()
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}

/// Deterministic uniform stream for randomized grids (SplitMix64).
pub struct Grid(u64);

impl Grid {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        lo + (hi - lo) * (z >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn int(&mut self, lo: u32, hi: u32) -> u32 {
        (self.uniform(lo as f64, hi as f64 + 1.0).floor() as u32).min(hi)
    }
}
