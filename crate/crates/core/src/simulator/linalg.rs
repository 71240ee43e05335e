//! Gramian inverses, ZF filters and null-space projections on small complex
//! matrices.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;

use super::{Result, SimError};

/// Realizations whose Gramian condition bound exceeds this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Diagonal and trace of (HᴴH)⁻¹.
#[derive(Debug, Clone, PartialEq)]
pub struct GramInverse {
    pub diag: Vec<f64>,
    pub trace: f64,
}

pub(crate) struct Gram {
    chol: Cholesky<Complex64, Dyn>,
    inverse: DMatrix<Complex64>,
}

impl Gram {
    /// Cholesky factorization of HᴴH, rejecting (near-)singular cases.
    ///
    /// The condition check uses tr(G)·tr(G⁻¹), an upper bound on the
    /// spectral condition number.
    pub(crate) fn new(h: &DMatrix<Complex64>) -> Result<Self> {
        if h.ncols() == 0 || h.nrows() < h.ncols() {
            return Err(SimError::RankDeficient);
        }
        let g = h.adjoint() * h;
        let trace_g: f64 = g.diagonal().iter().map(|z| z.re).sum();
        let chol = Cholesky::new(g).ok_or(SimError::RankDeficient)?;
        let inverse = chol.inverse();
        let trace_inv: f64 = inverse.diagonal().iter().map(|z| z.re).sum();
        let bound = trace_g * trace_inv;
        if !(bound.is_finite() && bound <= MAX_CONDITION && trace_inv > 0.0) {
            return Err(SimError::IllConditioned { bound });
        }
        Ok(Self { chol, inverse })
    }

    pub(crate) fn inverse_diag(&self, i: usize) -> f64 {
        self.inverse[(i, i)].re
    }

    pub(crate) fn inverse_trace(&self) -> f64 {
        self.inverse.diagonal().iter().map(|z| z.re).sum()
    }

    /// y = G⁻¹ e_i; the ZF filter for stream i is the row yᴴHᴴ.
    pub(crate) fn solve_unit(&self, i: usize) -> DVector<Complex64> {
        let mut e = DVector::zeros(self.inverse.nrows());
        e[i] = Complex64::new(1.0, 0.0);
        self.chol.solve(&e)
    }
}

/// [(HᴴH)⁻¹]_{ii} for every i, and the trace.
pub fn inv_gram_diag(h: &DMatrix<Complex64>) -> Result<GramInverse> {
    let gram = Gram::new(h)?;
    let diag: Vec<f64> = (0..h.ncols()).map(|i| gram.inverse_diag(i)).collect();
    Ok(GramInverse {
        trace: gram.inverse_trace(),
        diag,
    })
}

/// Columns `first..` of `h`.
pub(crate) fn deflate(h: &DMatrix<Complex64>, first: usize) -> DMatrix<Complex64> {
    h.columns(first, h.ncols() - first).into_owned()
}

/// Eigenvalue counts (zeros, ones) of I − H_I(H_IᴴH_I)⁻¹H_Iᴴ, where H_I
/// holds the streams still interfering with stage `stage` (1-based):
/// columns stage+1..M of `h`.
pub fn projection_dof_check(h: &DMatrix<Complex64>, stage: usize) -> Result<(usize, usize)> {
    const TOL: f64 = 1e-8;
    let n = h.nrows();
    if stage == 0 || stage > h.ncols() {
        return Err(SimError::Stage(crate::stage::StageError {
            stage,
            n_tx: h.ncols(),
        }));
    }
    let mut proj = DMatrix::<Complex64>::identity(n, n);
    if stage < h.ncols() {
        let hi = deflate(h, stage);
        let gram = Gram::new(&hi)?;
        proj -= &hi * &gram.inverse * hi.adjoint();
    }
    // Symmetrize against rounding before the Hermitian eigen-solve.
    let proj = (&proj + proj.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = proj.symmetric_eigen();
    let (mut zeros, mut ones) = (0, 0);
    for &l in eig.eigenvalues.iter() {
        if l.abs() < TOL {
            zeros += 1;
        } else if (l - 1.0).abs() < TOL {
            ones += 1;
        } else {
            return Err(SimError::Projection { eigenvalue: l });
        }
    }
    Ok((zeros, ones))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn orthonormal_columns() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = DMatrix::from_row_slice(3, 2, &[c(s, 0.0), c(0.0, 0.0), c(0.0, s), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let g = inv_gram_diag(&h).unwrap();
        for d in &g.diag {
            assert!((d - 1.0).abs() < 1e-14);
        }
        let g = inv_gram_diag(&(h * c(3.0, 0.0))).unwrap();
        for d in &g.diag {
            assert!((d - 1.0 / 9.0).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_rejected() {
        let h = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]);
        assert!(inv_gram_diag(&h).is_err());
        let h = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0 + 1e-9, 0.0)]);
        assert!(matches!(inv_gram_diag(&h), Err(SimError::IllConditioned { .. }) | Err(SimError::RankDeficient)));
    }

    #[test]
    fn projection_identity_at_last_stage() {
        let h = DMatrix::from_fn(3, 3, |i, j| c((i + 2 * j) as f64, (i * j) as f64 + 1.0));
        assert_eq!(projection_dof_check(&h, 3).unwrap(), (0, 3));
    }
}
