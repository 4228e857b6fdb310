//! Symmetric pentadiagonal matrices and their Cholesky factorization.

use crate::error::{BeamError, Result};

/// Symmetric matrix with bandwidth 2, stored by diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct SymPentadiagonal {
    pub diag: Vec<f64>,
    /// `off1[i] = M[i][i+1]`
    pub off1: Vec<f64>,
    /// `off2[i] = M[i][i+2]`
    pub off2: Vec<f64>,
}

impl SymPentadiagonal {
    pub fn zeros(n: usize) -> Self {
        SymPentadiagonal {
            diag: vec![0.0; n],
            off1: vec![0.0; n.saturating_sub(1)],
            off2: vec![0.0; n.saturating_sub(2)],
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i >= 1 {
                s += self.off1[i - 1] * x[i - 1];
            }
            if i >= 2 {
                s += self.off2[i - 2] * x[i - 2];
            }
            if i + 1 < n {
                s += self.off1[i] * x[i + 1];
            }
            if i + 2 < n {
                s += self.off2[i] * x[i + 2];
            }
            y[i] = s;
        }
        y
    }

    /// `M = L L^T` with `L` lower triangular of bandwidth 2.
    pub fn cholesky(&self) -> Result<BandedCholesky> {
        let n = self.dim();
        let mut l0 = vec![0.0; n];
        let mut l1 = vec![0.0; n]; // L[i][i-1]
        let mut l2 = vec![0.0; n]; // L[i][i-2]
        for i in 0..n {
            if i >= 2 {
                l2[i] = self.off2[i - 2] / l0[i - 2];
            }
            if i >= 1 {
                let mut s = self.off1[i - 1];
                if i >= 2 {
                    s -= l2[i] * l1[i - 1];
                }
                l1[i] = s / l0[i - 1];
            }
            let pivot = self.diag[i] - l1[i] * l1[i] - l2[i] * l2[i];
            if !(pivot > 0.0) || !pivot.is_finite() {
                return Err(BeamError::SingularJacobian);
            }
            l0[i] = pivot.sqrt();
        }
        Ok(BandedCholesky { l0, l1, l2 })
    }
}

#[derive(Debug, Clone)]
pub struct BandedCholesky {
    l0: Vec<f64>,
    l1: Vec<f64>,
    l2: Vec<f64>,
}

impl BandedCholesky {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.l0.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = rhs[i];
            if i >= 1 {
                s -= self.l1[i] * y[i - 1];
            }
            if i >= 2 {
                s -= self.l2[i] * y[i - 2];
            }
            y[i] = s / self.l0[i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            if i + 1 < n {
                s -= self.l1[i + 1] * x[i + 1];
            }
            if i + 2 < n {
                s -= self.l2[i + 2] * x[i + 2];
            }
            x[i] = s / self.l0[i];
        }
        x
    }
}
