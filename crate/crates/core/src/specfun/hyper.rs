//! Kummer's confluent hypergeometric function ₁F₁(a; b; x).

use super::{domain, log_add, Result, SeriesControl, SeriesSum, SpecfunError};

fn is_non_positive_integer(v: f64) -> bool {
    v <= 0.0 && v == v.round()
}

/// ₁F₁(a; b; x) with the default [`SeriesControl`].
pub fn kummer_1f1(a: f64, b: f64, x: f64) -> Result<f64> {
    let s = kummer_1f1_series(a, b, x, &SeriesControl::default())?;
    if !s.converged {
        return Err(SpecfunError::NonConvergence {
            func: "kummer_1f1",
            terms: s.terms_used,
        });
    }
    Ok(s.value)
}

/// ₁F₁(a; b; x) by its power series with the Pochhammer-ratio recurrence.
///
/// For x < 0 (unless the series terminates) Kummer's transformation
/// e^x ₁F₁(b−a; b; −x) is summed instead, which avoids alternating terms.
pub fn kummer_1f1_series(a: f64, b: f64, x: f64, ctrl: &SeriesControl) -> Result<SeriesSum> {
    ctrl.validate()?;
    if a.is_nan() || b.is_nan() || x.is_nan() || is_non_positive_integer(b) {
        return Err(domain("kummer_1f1", format!("a = {a}, b = {b}, x = {x}")));
    }
    if x == 0.0 || a == 0.0 {
        return Ok(SeriesSum {
            value: 1.0,
            terms_used: 1,
            converged: true,
        });
    }
    if x < 0.0 && !is_non_positive_integer(a) {
        let inner = raw_series(b - a, b, -x, ctrl)?;
        let value = inner.value.signum() * (x + inner.value.abs().ln()).exp();
        return Ok(SeriesSum { value, ..inner });
    }
    raw_series(a, b, x, ctrl)
}

fn raw_series(a: f64, b: f64, x: f64, ctrl: &SeriesControl) -> Result<SeriesSum> {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 0..ctrl.max_terms {
        let kf = k as f64;
        let ratio = (a + kf) / (b + kf) * x / (kf + 1.0);
        term *= ratio;
        sum += term;
        if !sum.is_finite() {
            return Err(SpecfunError::Overflow { func: "kummer_1f1" });
        }
        if term == 0.0 {
            return Ok(SeriesSum {
                value: sum,
                terms_used: k + 2,
                converged: true,
            });
        }
        // Bound the remaining tail once the term ratios are below one and
        // shrinking.
        let next = ((a + kf + 1.0) / (b + kf + 1.0)).abs().max(1.0) * x.abs() / (kf + 2.0);
        if next < 1.0 {
            let tail = term.abs() * next / (1.0 - next);
            if tail <= ctrl.threshold(sum) {
                return Ok(SeriesSum {
                    value: sum,
                    terms_used: k + 2,
                    converged: true,
                });
            }
        }
    }
    Ok(SeriesSum {
        value: sum,
        terms_used: ctrl.max_terms,
        converged: false,
    })
}

/// ln ₁F₁(a; b; x) for a, b > 0 and x ≥ 0, where every series term is
/// positive. Summed in log space, so values far beyond the `f64` range are
/// representable.
pub fn ln_kummer_1f1_positive(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && x >= 0.0) || x.is_infinite() {
        return Err(domain("ln_kummer_1f1_positive", format!("a = {a}, b = {b}, x = {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let ln_x = x.ln();
    let mut ln_term = 0.0f64;
    let mut ln_sum = 0.0f64;
    let cap = 1_000_000usize;
    for k in 0..cap {
        let kf = k as f64;
        ln_term += ((a + kf) / (b + kf)).ln() + ln_x - (kf + 1.0).ln();
        ln_sum = log_add(ln_sum, ln_term);
        let next = ((a + kf + 1.0) / (b + kf + 1.0)).max(1.0) * x / (kf + 2.0);
        if next < 1.0 {
            let ln_tail = ln_term + (next / (1.0 - next)).ln();
            if ln_tail - ln_sum < -39.0 {
                return Ok(ln_sum);
            }
        }
    }
    Err(SpecfunError::NonConvergence {
        func: "ln_kummer_1f1_positive",
        terms: cap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn trivial_identities() {
        assert_eq!(kummer_1f1(2.3, 1.7, 0.0).unwrap(), 1.0);
        for x in [-3.0, 0.5, 4.0, 20.0] {
            assert!(rel(kummer_1f1(1.0, 1.0, x).unwrap(), x.exp()) < 1e-10);
        }
        assert!(rel(kummer_1f1(1.0, 2.0, 1.0).unwrap(), std::f64::consts::E - 1.0) < 1e-10);
    }

    #[test]
    fn terminating_polynomial() {
        // ₁F₁(−2; 3; x) = 1 − 2x/3 + x²/12
        let x = 5.0;
        let want = 1.0 - 2.0 * x / 3.0 + x * x / 12.0;
        assert!(rel(kummer_1f1(-2.0, 3.0, x).unwrap(), want) < 1e-14);
        assert!(rel(kummer_1f1(-2.0, 3.0, -x).unwrap(), 1.0 + 2.0 * x / 3.0 + x * x / 12.0) < 1e-14);
    }

    #[test]
    fn reference_values() {
        // mpmath.hyp1f1 at 40 digits
        let cases = [
            (6.5, 6.0, 12.5, 475_596.240_346_950_6),
            (3.0, 7.0, -25.0, 5.328_076_800_017_304e-3),
            (0.5, 1.5, -40.0, 0.140_124_780_409_948_2),
        ];
        for (a, b, x, want) in cases {
            let got = kummer_1f1(a, b, x).unwrap();
            assert!(rel(got, want) < 1e-10, "1F1({a};{b};{x}) = {got}, want {want}");
        }
    }

    #[test]
    fn log_positive_matches_direct_and_extends_range() {
        let direct = kummer_1f1(6.5, 6.0, 12.5).unwrap();
        assert!(rel(ln_kummer_1f1_positive(6.5, 6.0, 12.5).unwrap(), direct.ln()) < 1e-11);
        // ₁F₁(1;1;x) = e^x far beyond the f64 range
        assert!(rel(ln_kummer_1f1_positive(1.0, 1.0, 2000.0).unwrap(), 2000.0) < 1e-13);
    }

    #[test]
    fn invalid_b_rejected() {
        assert!(kummer_1f1(1.0, -2.0, 1.0).is_err());
        assert!(kummer_1f1(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn non_convergence_is_reported() {
        let ctrl = SeriesControl::new(1e-10, 1e-12, 5).unwrap();
        let s = kummer_1f1_series(2.0, 3.0, 50.0, &ctrl).unwrap();
        assert!(!s.converged);
        assert_eq!(s.terms_used, 5);
    }
}
