//! Modified Bessel function of the first kind, integer order.

use super::gamma::ln_gamma;
use super::{checked_exp, domain, Result};

/// ln I_ν(x) for x > 0.
///
/// Uses the large-argument expansion when it converges to full precision
/// and otherwise the power series summed outward from its largest term.
pub fn ln_bessel_i(order: u32, x: f64) -> Result<f64> {
    if !(x >= 0.0) || x.is_infinite() {
        return Err(domain("ln_bessel_i", format!("x = {x} must be finite and ≥ 0")));
    }
    if x == 0.0 {
        return Ok(if order == 0 { 0.0 } else { f64::NEG_INFINITY });
    }
    if x > 25.0 {
        if let Some(v) = ln_asymptotic(order, x) {
            return Ok(v);
        }
    }
    Ok(ln_series(order, x))
}

/// I_ν(x); signals overflow rather than returning infinity.
pub fn bessel_i(order: u32, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(if order == 0 { 1.0 } else { 0.0 });
    }
    checked_exp("bessel_i", ln_bessel_i(order, x)?)
}

/// e^{−x} I_ν(x), finite for every x ≥ 0.
pub fn bessel_i_scaled(order: u32, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(if order == 0 { 1.0 } else { 0.0 });
    }
    Ok((ln_bessel_i(order, x)? - x).exp())
}

fn ln_series(order: u32, x: f64) -> f64 {
    let nu = order as f64;
    let q = 0.25 * x * x;
    let k_peak = (0.5 * ((nu * nu + x * x).sqrt() - nu - 2.0)).round().max(0.0);
    let ln_half = (0.5 * x).ln();
    let ln_peak = (2.0 * k_peak + nu) * ln_half - ln_gamma(k_peak + 1.0) - ln_gamma(k_peak + nu + 1.0);

    let mut sum = 1.0;
    let mut r = 1.0;
    let mut k = k_peak;
    loop {
        r *= q / ((k + 1.0) * (k + nu + 1.0));
        sum += r;
        k += 1.0;
        if r < 1e-17 * sum {
            break;
        }
    }
    let mut r = 1.0;
    let mut k = k_peak;
    while k > 0.0 {
        r *= k * (k + nu) / q;
        sum += r;
        k -= 1.0;
        if r < 1e-17 * sum {
            break;
        }
    }
    ln_peak + sum.ln()
}

/// e^x/√(2πx) Σ_k (−1)^k a_k(ν)/x^k, accepted only if the terms shrink
/// below 1e-17 before they start growing.
fn ln_asymptotic(order: u32, x: f64) -> Option<f64> {
    let mu = 4.0 * (order as f64).powi(2);
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut k = 1.0f64;
    loop {
        let next = -term * (mu - (2.0 * k - 1.0).powi(2)) / (k * 8.0 * x);
        if next.abs() > term.abs() {
            return None;
        }
        sum += next;
        if next.abs() < 1e-17 * sum.abs() {
            break;
        }
        term = next;
        k += 1.0;
        if k > 200.0 {
            return None;
        }
    }
    if sum <= 0.0 {
        return None;
    }
    Some(x - 0.5 * (2.0 * std::f64::consts::PI * x).ln() + sum.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::SpecfunError;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn origin_values() {
        assert_eq!(bessel_i(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(1, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_i(7, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn power_series_oracle_at_one() {
        // Σ (1/2)^{2k}/(k!)² summed in exact rationals
        assert!(rel(bessel_i(0, 1.0).unwrap(), 1.266_065_877_752_008_3) < 1e-15);
    }

    #[test]
    fn reference_values() {
        // mpmath.besseli at 40 digits
        let cases = [
            (0, 0.3, 1.022_626_879_351_597_6),
            (3, 2.5, 0.474_370_408_778_035_6),
            (5, 30.0, 5.121_514_654_769_35e11),
            (12, 40.0, 2.440_129_433_289_008_3e15),
            (0, 700.0, 1.529_593_347_671_873_7e302),
            (40, 10.0, 2.042_123_273_987_862e-20),
        ];
        for (n, x, want) in cases {
            let got = bessel_i(n, x).unwrap();
            assert!(rel(got, want) < 1e-12, "I_{n}({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn overflow_is_signaled() {
        assert!(matches!(bessel_i(0, 800.0), Err(SpecfunError::Overflow { .. })));
        let s = bessel_i_scaled(0, 800.0).unwrap();
        assert!(rel(s, 1.0 / (2.0 * std::f64::consts::PI * 800.0).sqrt()) < 2e-4);
    }

    #[test]
    fn series_and_asymptotic_agree_near_switch() {
        for n in [0u32, 2, 4] {
            let a = ln_asymptotic(n, 26.0).unwrap();
            let s = ln_series(n, 26.0);
            assert!((a - s).abs() < 1e-13, "order {n}: {a} vs {s}");
        }
    }
}
