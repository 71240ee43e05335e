//! Nuttall-Q function Q_{μ,ν}(a,b) = ∫_b^∞ x^μ e^{−(x²+a²)/2} I_ν(ax) dx and
//! the Marcum-Q moment integral J = ∫₀¹ u^p Q_m(√(λu), b) du.

use std::collections::HashMap;

use super::bessel::ln_bessel_i;
use super::gamma::{ln_gamma, ln_gamma_p};
use super::hyper::ln_kummer_1f1_positive;
use super::marcum::marcum_pair;
use super::{checked_exp, domain, Result, SeriesControl, SpecfunError};
use crate::quad::{integrate, QuadOptions};

fn check_args(mu: f64, nu: u32, a: f64, b: f64) -> Result<()> {
    let ok = a > 0.0
        && a.is_finite()
        && b >= 0.0
        && b.is_finite()
        && mu.is_finite()
        && mu + nu as f64 + 1.0 > 0.0;
    if !ok {
        return Err(domain(
            "nuttall_q",
            format!("mu = {mu}, nu = {nu}, a = {a}, b = {b} (need a > 0, b ≥ 0, μ+ν > −1)"),
        ));
    }
    Ok(())
}

/// Q_{μ,ν}(a,b).
///
/// Dispatch: b = 0 uses the Kummer-function closed form; integer μ with
/// μ − ν odd and positive uses the finite recurrence down to
/// Q_{ν+1,ν}(a,b) = a^ν Q_{ν+1}(a,b); everything else goes to adaptive
/// quadrature. Debug builds cross-check closed forms against quadrature.
pub fn nuttall_q(mu: f64, nu: u32, a: f64, b: f64) -> Result<f64> {
    check_args(mu, nu, a, b)?;
    let Some(value) = nuttall_q_closed_form(mu, nu, a, b)? else {
        return nuttall_q_quadrature(mu, nu, a, b);
    };
    #[cfg(debug_assertions)]
    {
        let quad = nuttall_q_quadrature(mu, nu, a, b)?;
        if (value - quad).abs() > 1e-8 * value.abs().max(quad.abs()) {
            return Err(SpecfunError::Inconsistent {
                func: "nuttall_q",
                closed: value,
                quadrature: quad,
            });
        }
    }
    Ok(value)
}

/// The closed-form value of Q_{μ,ν}(a,b) when one applies, else `None`.
pub fn nuttall_q_closed_form(mu: f64, nu: u32, a: f64, b: f64) -> Result<Option<f64>> {
    check_args(mu, nu, a, b)?;
    if b == 0.0 {
        return b_zero(mu, nu, a).map(Some);
    }
    let is_int = mu == mu.round();
    let diff = mu - nu as f64;
    if is_int && diff >= 1.0 && (diff as i64) % 2 == 1 {
        let mut memo = HashMap::new();
        return recurrence(mu as i64, nu as i64, a, b, &mut memo).map(Some);
    }
    Ok(None)
}

/// Q_{μ,ν}(a,0) = Γ(A) a^ν 2^{(μ−ν−1)/2} / Γ(ν+1) · e^{−a²/2} ₁F₁(A; ν+1; a²/2),
/// A = (μ+ν+1)/2.
fn b_zero(mu: f64, nu: u32, a: f64) -> Result<f64> {
    let nu_f = nu as f64;
    let big_a = 0.5 * (mu + nu_f + 1.0);
    let y = 0.5 * a * a;
    let ln_v = ln_gamma(big_a) + nu_f * a.ln() + 0.5 * (mu - nu_f - 1.0) * std::f64::consts::LN_2
        - ln_gamma(nu_f + 1.0)
        - y
        + ln_kummer_1f1_positive(big_a, nu_f + 1.0, y)?;
    checked_exp("nuttall_q", ln_v)
}

/// Q_{μ,ν} = a Q_{μ−1,ν+1} + (μ+ν−1) Q_{μ−2,ν} + b^{μ−1} e^{−(a²+b²)/2} I_ν(ab),
/// valid for b > 0; every term is non-negative.
fn recurrence(mu: i64, nu: i64, a: f64, b: f64, memo: &mut HashMap<(i64, i64), f64>) -> Result<f64> {
    if let Some(&v) = memo.get(&(mu, nu)) {
        return Ok(v);
    }
    let v = if mu - nu == 1 {
        let (q, _) = marcum_pair(nu as u32 + 1, a, b, &SeriesControl::default())?;
        if q == 0.0 {
            0.0
        } else {
            checked_exp("nuttall_q", nu as f64 * a.ln() + q.ln())?
        }
    } else {
        let first = a * recurrence(mu - 1, nu + 1, a, b, memo)?;
        let second = (mu + nu - 1) as f64 * recurrence(mu - 2, nu, a, b, memo)?;
        let ln_third = (mu - 1) as f64 * b.ln() - 0.5 * (a * a + b * b) + ln_bessel_i(nu as u32, a * b)?;
        let total = first + second + ln_third.exp();
        if !total.is_finite() {
            return Err(SpecfunError::Overflow { func: "nuttall_q" });
        }
        total
    };
    memo.insert((mu, nu), v);
    Ok(v)
}

fn ln_integrand(mu: f64, nu: u32, a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    // x^μ e^{−(x−a)²/2} · e^{−ax} I_ν(ax)
    let ln_i = ln_bessel_i(nu, a * x).unwrap_or(f64::NEG_INFINITY);
    mu * x.ln() - 0.5 * (x - a) * (x - a) + (ln_i - a * x)
}

/// Q_{μ,ν}(a,b) by adaptive Gauss–Kronrod on the log-rescaled integrand.
///
/// The integration range [b, x_hi] is extended until the log-integrand has
/// dropped 60 units below its maximum; beyond that the Gaussian factor makes
/// the remaining mass negligible at double precision.
pub fn nuttall_q_quadrature(mu: f64, nu: u32, a: f64, b: f64) -> Result<f64> {
    check_args(mu, nu, a, b)?;
    let f = |x: f64| ln_integrand(mu, nu, a, x);
    let spread = (mu.max(0.0) + nu as f64).sqrt();
    let mut hi = b.max(a).max(spread) + 12.0;
    let (grid_max, arg_max) = loop {
        let mut grid_max = f64::NEG_INFINITY;
        let mut arg_max = b;
        let n = 256;
        for i in 0..=n {
            let x = b + (hi - b) * i as f64 / n as f64;
            let v = f(x);
            if v > grid_max {
                grid_max = v;
                arg_max = x;
            }
        }
        if f(hi) < grid_max - 60.0 {
            break (grid_max, arg_max);
        }
        hi = b + 2.0 * (hi - b);
        if hi > 1e6 {
            return Err(domain("nuttall_q", "integrand does not decay"));
        }
    };
    if grid_max == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    let opts = QuadOptions {
        abs_tol: 1e-300,
        rel_tol: 1e-12,
        max_subdivisions: 4000,
    };
    let q = integrate(|x| (f(x) - grid_max).exp(), b, hi, &[arg_max], opts)
        .map_err(|source| SpecfunError::Quadrature {
            func: "nuttall_q",
            source,
        })?;
    checked_exp("nuttall_q", grid_max + q.value.ln())
}

/// J(p, m, b) = ∫₀¹ u^p Q_m(√u, b) du.
pub fn marcum_integral_j(p: f64, m: u32, b: f64) -> Result<f64> {
    marcum_integral_j_scaled(p, m, b, 1.0)
}

/// J_λ(p, m, b) = ∫₀¹ u^p Q_m(√(λu), b) du.
///
/// Closed form: J = (Q_m(√λ, b) − R)/(p+1) with
/// R = (2/λ)^{p+1} e^{−b²/2} Σ_k (b²/2)^{m+k} γ(p+2+k, λ/2) / (k! (m+k)!).
/// For integer p, R = λ^{−(p+1)} b^m [Q_{n,m}(b,0) − Q_{n,m}(b,√λ)] with
/// Nuttall order n = 2p+3−m; the series form keeps every term positive and
/// also covers non-integer p.
pub fn marcum_integral_j_scaled(p: f64, m: u32, b: f64, lambda: f64) -> Result<f64> {
    Ok(marcum_integral_pair(p, m, b, lambda)?.0)
}

/// (J_λ, J̄_λ) where J̄_λ = ∫₀¹ u^p (1 − Q_m(√(λu), b)) du = 1/(p+1) − J_λ,
/// each computed without cancellation.
pub(crate) fn marcum_integral_pair(p: f64, m: u32, b: f64, lambda: f64) -> Result<(f64, f64)> {
    if !(p >= 0.0) || m == 0 || !(b >= 0.0) || !(lambda > 0.0) || !lambda.is_finite() || !b.is_finite() {
        return Err(domain(
            "marcum_integral_j",
            format!("p = {p}, m = {m}, b = {b}, lambda = {lambda}"),
        ));
    }
    // These feed an alternating sum, so truncate at working precision.
    let ctrl = SeriesControl {
        rel_tol: 1e-16,
        abs_tol: 1e-300,
        ..SeriesControl::default()
    };
    let (q, q_comp) = marcum_pair(m, lambda.sqrt(), b, &ctrl)?;
    let r = nuttall_difference_series(p, m, b, lambda, &ctrl)?;
    let scale = 1.0 / (p + 1.0);
    Ok((((q - r) * scale).max(0.0), (q_comp + r) * scale))
}

fn nuttall_difference_series(p: f64, m: u32, b: f64, lambda: f64, ctrl: &SeriesControl) -> Result<f64> {
    if b == 0.0 {
        return Ok(0.0);
    }
    let y = 0.5 * b * b;
    let x = 0.5 * lambda;
    let mf = m as f64;
    let ln_y = y.ln();
    let ln_pref = (p + 1.0) * (2.0 / lambda).ln() - y;
    let mut sum = 0.0;
    for k in 0..ctrl.max_terms {
        let kf = k as f64;
        let s = p + 2.0 + kf;
        let ln_t = ln_pref + (mf + kf) * ln_y - ln_gamma(kf + 1.0) - ln_gamma(mf + kf + 1.0)
            + ln_gamma(s)
            + ln_gamma_p(s, x)?;
        let t = ln_t.exp();
        sum += t;
        let ratio = y * s / ((kf + 1.0) * (mf + kf + 1.0));
        if ratio < 1.0 && t * ratio / (1.0 - ratio) <= ctrl.threshold(sum) {
            return Ok(sum);
        }
    }
    Err(SpecfunError::NonConvergence {
        func: "marcum_integral_j",
        terms: ctrl.max_terms,
    })
}
