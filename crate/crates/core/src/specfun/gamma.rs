//! Gamma-family functions: log-gamma, incomplete gamma (including negative
//! order), exponential integral and beta.

use super::{checked_exp, domain, Result, SpecfunError};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const ITER_CAP: usize = 1_000_000;
const CF_TINY: f64 = 1e-300;

const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_746,
    -0.491_913_816_097_620_2,
    3.399_464_998_481_189e-5,
    4.652_362_892_704_858e-5,
    -9.837_447_530_487_956e-5,
    1.580_887_032_249_125e-4,
    -2.102_644_417_241_049e-4,
    2.174_396_181_152_126e-4,
    -1.643_181_065_367_639e-4,
    8.441_822_398_385_275e-5,
    -2.619_083_840_158_141e-5,
    3.689_918_265_953_162e-6,
];

/// Remainder of Stirling's series, `lnΓ(x) − [(x−½)ln x − x + ½ln 2π]`, for x ≥ 10.
pub(crate) fn stirling_correction(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    r * (1.0 / 12.0
        - r2 * (1.0 / 360.0
            - r2 * (1.0 / 1260.0
                - r2 * (1.0 / 1680.0 - r2 * (1.0 / 1188.0 - r2 * (691.0 / 360_360.0))))))
}

/// Natural log of Γ(x) for x > 0; NaN outside that domain.
pub fn ln_gamma(x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return f64::INFINITY;
    }
    if x < 0.5 {
        return ln_gamma(x + 1.0) - x.ln();
    }
    if x >= 10.0 {
        return (x - 0.5) * x.ln() - x + LN_SQRT_2PI + stirling_correction(x);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    LN_SQRT_2PI + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Γ(x) for x > 0.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(domain("gamma_fn", format!("x = {x} must be positive")));
    }
    if x == x.round() && x <= 23.0 {
        let mut f = 1.0;
        for k in 2..(x as u64) {
            f *= k as f64;
        }
        return Ok(f);
    }
    checked_exp("gamma_fn", ln_gamma(x))
}

/// ln B(a,b) for a, b > 0; NaN outside that domain.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    if !(a > 0.0 && b > 0.0) {
        return f64::NAN;
    }
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// B(a,b) = Γ(a)Γ(b)/Γ(a+b), evaluated through log-gamma.
pub fn beta_fn(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(domain("beta_fn", format!("a = {a}, b = {b} must be positive")));
    }
    checked_exp("beta_fn", ln_beta(a, b))
}

/// ln(1+t) − t, accurate near t = 0.
fn log1pmx(t: f64) -> f64 {
    if t.abs() < 0.5 {
        let mut term = t;
        let mut sum = 0.0;
        let mut k = 2.0;
        loop {
            term *= -t;
            let add = term / k;
            sum += add;
            if add.abs() <= 1e-17 * sum.abs() {
                return sum;
            }
            k += 1.0;
        }
    } else {
        t.ln_1p() - t
    }
}

/// ln(x^s e^{−x} / Γ(s+1)) for s ≥ 0, x ≥ 0: the Poisson-type step between
/// consecutive regularized gamma values, Q(s+1,x) − Q(s,x).
pub(crate) fn regularized_step_ln(s: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if s == 0.0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if s >= 10.0 {
        s * log1pmx((x - s) / s) - 0.5 * (2.0 * std::f64::consts::PI * s).ln() - stirling_correction(s)
    } else {
        s * x.ln() - x - ln_gamma(s + 1.0)
    }
}

/// Σ_n x^n / ((a+1)…(a+n)); P(a,x) = prefix · this.
fn lower_series(a: f64, x: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 1..ITER_CAP {
        term *= x / (a + n as f64);
        sum += term;
        if term <= sum * 1e-17 {
            return Ok(sum);
        }
    }
    Err(SpecfunError::NonConvergence {
        func: "incomplete gamma series",
        terms: ITER_CAP,
    })
}

/// Legendre continued fraction h with Γ(a,x) = e^{−x} x^a h, any real a, x > 0.
fn upper_cf(a: f64, x: f64) -> Result<f64> {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / CF_TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..ITER_CAP {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = b + an / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 4.0 * f64::EPSILON {
            return Ok(h);
        }
    }
    Err(SpecfunError::NonConvergence {
        func: "incomplete gamma continued fraction",
        terms: ITER_CAP,
    })
}

fn check_pq_args(func: &'static str, a: f64, x: f64) -> Result<()> {
    if !(a > 0.0) || !(x >= 0.0) {
        return Err(domain(func, format!("a = {a} must be > 0 and x = {x} must be ≥ 0")));
    }
    Ok(())
}

/// Regularized lower and upper incomplete gamma, (P, Q), each computed on
/// its stable side.
fn gamma_pq(a: f64, x: f64) -> Result<(f64, f64)> {
    if x == 0.0 {
        return Ok((0.0, 1.0));
    }
    if x == f64::INFINITY {
        return Ok((1.0, 0.0));
    }
    if x < a + 1.0 {
        let p = (regularized_step_ln(a, x) + lower_series(a, x)?.ln()).exp();
        let p = p.min(1.0);
        Ok((p, 1.0 - p))
    } else {
        let q = (regularized_step_ln(a, x) + (a * upper_cf(a, x)?).ln()).exp();
        let q = q.min(1.0);
        Ok((1.0 - q, q))
    }
}

/// Regularized lower incomplete gamma P(a,x) = γ(a,x)/Γ(a).
pub fn gamma_p(a: f64, x: f64) -> Result<f64> {
    check_pq_args("gamma_p", a, x)?;
    Ok(gamma_pq(a, x)?.0)
}

/// Regularized upper incomplete gamma Q(a,x) = Γ(a,x)/Γ(a).
pub fn gamma_q(a: f64, x: f64) -> Result<f64> {
    check_pq_args("gamma_q", a, x)?;
    Ok(gamma_pq(a, x)?.1)
}

/// ln P(a,x), finite even where P underflows.
pub fn ln_gamma_p(a: f64, x: f64) -> Result<f64> {
    check_pq_args("ln_gamma_p", a, x)?;
    if x == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if x < a + 1.0 {
        Ok(regularized_step_ln(a, x) + lower_series(a, x)?.ln())
    } else {
        Ok((-gamma_pq(a, x)?.1).ln_1p())
    }
}

/// Lower incomplete gamma γ(a,x) for a > 0, x ≥ 0.
pub fn gamma_lower(a: f64, x: f64) -> Result<f64> {
    check_pq_args("gamma_lower", a, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    checked_exp("gamma_lower", ln_gamma(a) + ln_gamma_p(a, x)?)
}

/// Exponential integral E₁(x) for x > 0.
pub fn expint_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(domain("expint_e1", format!("x = {x} must be positive")));
    }
    if x <= 1.0 {
        Ok(e1_series(x))
    } else {
        Ok((-x).exp() * upper_cf(0.0, x)?)
    }
}

/// e^x E₁(x) for x > 0, free of overflow for large x.
pub fn exp_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(domain("exp_e1", format!("x = {x} must be positive")));
    }
    if x <= 1.0 {
        Ok(x.exp() * e1_series(x))
    } else {
        upper_cf(0.0, x)
    }
}

fn e1_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    let mut k = 1.0;
    loop {
        term *= -x / k;
        let add = term / k;
        sum += add;
        if add.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
        k += 1.0;
    }
    -EULER_GAMMA - x.ln() - sum
}

/// Upper incomplete gamma Γ(a,x) for real a, including zero and negative
/// orders.
///
/// For a ≤ 0 and x ≤ 1 the downward recurrence
/// Γ(a,x) = (Γ(a+1,x) − x^a e^{−x})/a is run from Γ(a₀,x), a₀ ∈ [0,1);
/// it is well conditioned there because x^j/j! ≤ 1. For x > 1 the same
/// recurrence amplifies rounding error, so the Legendre continued fraction
/// is used directly.
pub fn gamma_upper(a: f64, x: f64) -> Result<f64> {
    if a.is_nan() || x.is_nan() || x < 0.0 || (x == 0.0 && a <= 0.0) {
        return Err(domain("gamma_upper", format!("a = {a}, x = {x}")));
    }
    if a > 0.0 {
        if x == 0.0 {
            return gamma_fn(a);
        }
        if x >= a + 1.0 {
            return checked_exp("gamma_upper", a * x.ln() - x + upper_cf(a, x)?.ln());
        }
        let q = gamma_pq(a, x)?.1;
        return checked_exp("gamma_upper", ln_gamma(a) + q.ln());
    }
    if a == 0.0 {
        return expint_e1(x);
    }
    if x > 1.0 {
        return checked_exp("gamma_upper", a * x.ln() - x + upper_cf(a, x)?.ln());
    }
    let steps = (-a).ceil();
    let a0 = a + steps;
    let mut value = if a0 == 0.0 { expint_e1(x)? } else { gamma_upper(a0, x)? };
    let ex = (-x).exp();
    let mut s = a0;
    for _ in 0..steps as usize {
        s -= 1.0;
        value = (value - x.powf(s) * ex) / s;
    }
    if value.is_infinite() {
        return Err(SpecfunError::Overflow { func: "gamma_upper" });
    }
    Ok(value)
}

/// f_j = c^j e^c Γ(−j, c) for j = 0..=j_max.
///
/// f_j = ∫₀^∞ (1+t)^{−j−1} e^{−ct} dt, so each entry lies in (0, 1/max(j,c)].
/// The sequence is seeded near j* = ⌊c⌋ by the continued fraction and then
/// recurred outward: upward (f_j = (1 − c f_{j−1})/j) for j > c and
/// downward (f_{j−1} = (1 − j f_j)/c) for j ≤ c, the stable direction on
/// each side.
pub fn exp_gamma_neg_sequence(j_max: usize, c: f64) -> Result<Vec<f64>> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(domain("exp_gamma_neg_sequence", format!("c = {c} must be positive and finite")));
    }
    let seed = (c.floor() as usize).min(j_max);
    let mut f = vec![0.0; j_max + 1];
    f[seed] = if seed == 0 { exp_e1(c)? } else { upper_cf(-(seed as f64), c)? };
    for j in (1..=seed).rev() {
        f[j - 1] = (1.0 - j as f64 * f[j]) / c;
    }
    for j in (seed + 1)..=j_max {
        f[j] = (1.0 - c * f[j - 1]) / j as f64;
    }
    Ok(f)
}
