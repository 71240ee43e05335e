//! Generalized Marcum-Q function of integer order.
//!
//! Q_m(a,b) = Σ_k Pois(k; a²/2) · Q(m+k, b²/2), with Q the regularized upper
//! incomplete gamma. The side of the distribution holding less mass is
//! summed (Q itself when b²/2 lies above the mean m + a²/2, the complement
//! otherwise), and consecutive gamma values are generated by adding
//! positive Poisson-type steps so that no recurrence subtracts.

use super::gamma::{gamma_p, gamma_q, ln_gamma, regularized_step_ln};
use super::{domain, Result, SeriesControl, SeriesSum, SpecfunError};

/// Q_m(a,b) with the default [`SeriesControl`].
pub fn marcum_q(order: u32, a: f64, b: f64) -> Result<f64> {
    Ok(marcum_pair(order, a, b, &SeriesControl::default())?.0)
}

/// 1 − Q_m(a,b), accurate when Q_m is close to one.
pub fn marcum_q_complement(order: u32, a: f64, b: f64) -> Result<f64> {
    Ok(marcum_pair(order, a, b, &SeriesControl::default())?.1)
}

/// Q_m(a,b) with explicit truncation control and term accounting.
pub fn marcum_q_series(order: u32, a: f64, b: f64, ctrl: &SeriesControl) -> Result<SeriesSum> {
    let (q, _, terms_used, converged) = marcum_core(order, a, b, ctrl)?;
    Ok(SeriesSum {
        value: q,
        terms_used,
        converged,
    })
}

/// (Q_m(a,b), 1 − Q_m(a,b)); fails if the series did not converge.
pub(crate) fn marcum_pair(order: u32, a: f64, b: f64, ctrl: &SeriesControl) -> Result<(f64, f64)> {
    let (q, p, terms, converged) = marcum_core(order, a, b, ctrl)?;
    if !converged {
        return Err(SpecfunError::NonConvergence {
            func: "marcum_q",
            terms,
        });
    }
    Ok((q, p))
}

fn marcum_core(order: u32, a: f64, b: f64, ctrl: &SeriesControl) -> Result<(f64, f64, usize, bool)> {
    ctrl.validate()?;
    if order == 0 || !(a >= 0.0) || !(b >= 0.0) || a.is_infinite() || b.is_infinite() {
        return Err(domain(
            "marcum_q",
            format!("order = {order} must be ≥ 1, a = {a} and b = {b} finite and ≥ 0"),
        ));
    }
    if b == 0.0 {
        return Ok((1.0, 0.0, 1, true));
    }
    let m = order as f64;
    let y = 0.5 * b * b;
    if a == 0.0 {
        let q = gamma_q(m, y)?;
        let p = gamma_p(m, y)?;
        return Ok((q, p, 1, true));
    }
    let lam = 0.5 * a * a;
    let (ln_lam, ln_y) = (lam.ln(), y.ln());
    let clamp = |v: f64| v.clamp(0.0, 1.0);

    if y >= m + lam {
        // Upper side: terms w_k Q(m+k, y) with Q rising in k.
        let k_lo = (lam - 12.0 * lam.sqrt() - 12.0).floor().max(0.0);
        let mut ln_w = k_lo * ln_lam - lam - ln_gamma(k_lo + 1.0);
        let mut s = m + k_lo;
        let mut qk = gamma_q(s, y)?;
        let mut ln_d = regularized_step_ln(s, y);
        let mut k = k_lo;
        let mut sum = 0.0;
        let mut terms = 0;
        loop {
            let term = ln_w.exp() * qk;
            sum += term;
            terms += 1;
            let q_next = qk + ln_d.exp();
            ln_d += ln_y - (s + 1.0).ln();
            s += 1.0;
            let ln_w_next = ln_w + ln_lam - (k + 1.0).ln();
            if k + 1.0 > lam && qk > 0.0 && term > 0.0 {
                let ratio = (lam / (k + 1.0)) * (q_next / qk);
                if ratio < 1.0 && term * ratio / (1.0 - ratio) <= ctrl.threshold(sum) {
                    return Ok((clamp(sum), clamp(1.0 - sum), terms, true));
                }
            }
            if k + 1.0 > lam && sum == 0.0 && ln_w_next < -745.0 {
                return Ok((0.0, 1.0, terms, true));
            }
            if terms >= ctrl.max_terms {
                return Ok((clamp(sum), clamp(1.0 - sum), terms, false));
            }
            qk = q_next;
            ln_w = ln_w_next;
            k += 1.0;
        }
    }

    // Lower side: 1 − Q = Σ_k w_k P(m+k, y), P falling in k. The Poisson
    // tail above k_hi is below e^{-72} of the modal weight.
    let k_hi = (lam + 12.0 * lam.sqrt() + 12.0).ceil();
    let terms = k_hi as usize + 1;
    if terms > ctrl.max_terms {
        return Ok((f64::NAN, f64::NAN, ctrl.max_terms, false));
    }
    let mut s = m + k_hi;
    let mut pk = gamma_p(s, y)?;
    let mut ln_d = regularized_step_ln(s - 1.0, y);
    let mut ln_w = k_hi * ln_lam - lam - ln_gamma(k_hi + 1.0);
    let mut sum = 0.0;
    let mut k = k_hi;
    loop {
        sum += ln_w.exp() * pk;
        if k == 0.0 {
            break;
        }
        pk += ln_d.exp();
        ln_d += (s - 1.0).ln() - ln_y;
        s -= 1.0;
        ln_w += k.ln() - ln_lam;
        k -= 1.0;
    }
    Ok((clamp(1.0 - sum), clamp(sum), terms, true))
}
