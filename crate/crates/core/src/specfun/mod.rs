//! Special functions behind the outage and capacity expressions.
//!
//! Every routine works in log space where the unscaled value can leave the
//! `f64` range, and signals overflow instead of returning infinity.

mod bessel;
mod gamma;
mod hyper;
mod marcum;
mod nuttall;

pub use bessel::{bessel_i, bessel_i_scaled, ln_bessel_i};
pub use gamma::{
    beta_fn, exp_e1, exp_gamma_neg_sequence, expint_e1, gamma_fn, gamma_lower, gamma_p,
    gamma_q, gamma_upper, ln_beta, ln_gamma, ln_gamma_p,
};
pub use hyper::{kummer_1f1, kummer_1f1_series, ln_kummer_1f1_positive};
pub use marcum::{marcum_q, marcum_q_complement, marcum_q_series};
pub(crate) use nuttall::marcum_integral_pair;
pub use nuttall::{
    marcum_integral_j, marcum_integral_j_scaled, nuttall_q, nuttall_q_closed_form,
    nuttall_q_quadrature,
};

pub(crate) use gamma::regularized_step_ln;

use crate::quad::QuadError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecfunError {
    #[error("{func}: argument outside the domain ({detail})")]
    Domain { func: &'static str, detail: String },
    #[error("{func}: value exceeds the f64 range")]
    Overflow { func: &'static str },
    #[error("{func}: series did not converge within {terms} terms")]
    NonConvergence { func: &'static str, terms: usize },
    #[error("{func}: quadrature failed: {source}")]
    Quadrature {
        func: &'static str,
        #[source]
        source: QuadError,
    },
    #[error("{func}: closed form {closed} disagrees with quadrature {quadrature}")]
    Inconsistent {
        func: &'static str,
        closed: f64,
        quadrature: f64,
    },
}

pub type Result<T> = std::result::Result<T, SpecfunError>;

pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> SpecfunError {
    SpecfunError::Domain {
        func,
        detail: detail.into(),
    }
}

/// Truncation policy for infinite series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_terms: usize,
}

impl SeriesControl {
    pub fn new(rel_tol: f64, abs_tol: f64, max_terms: usize) -> Result<Self> {
        let ctrl = Self {
            rel_tol,
            abs_tol,
            max_terms,
        };
        ctrl.validate()?;
        Ok(ctrl)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.max_terms >= 1) {
            return Err(domain(
                "SeriesControl",
                format!(
                    "rel_tol={}, abs_tol={}, max_terms={}",
                    self.rel_tol, self.abs_tol, self.max_terms
                ),
            ));
        }
        Ok(())
    }

    /// The tolerance a tail bound must drop below, given the running sum.
    pub fn threshold(&self, sum: f64) -> f64 {
        self.abs_tol.min(self.rel_tol * sum.abs())
    }
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_terms: 10_000,
        }
    }
}

/// A series value together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub value: f64,
    pub terms_used: usize,
    pub converged: bool,
}

/// `ln(e^a + e^b)` without overflow.
pub(crate) fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Exponentiates a log value, reporting overflow for `func`.
pub(crate) fn checked_exp(func: &'static str, ln_value: f64) -> Result<f64> {
    let v = ln_value.exp();
    if v.is_infinite() {
        Err(SpecfunError::Overflow { func })
    } else {
        Ok(v)
    }
}
