//! Discrete sine transform between modal coefficients and interior nodal values.
//!
//! With `N` interior nodes `x_i = a + i h` and modes `k = 1..N`,
//! `u_i = sum_k c_k sin(k pi i / (N+1))` and `c_k = 2/(N+1) sum_i u_i sin(k pi i / (N+1))`.

use std::f64::consts::PI;

use super::Grid;
use crate::error::{BeamError, Result};

#[derive(Debug, Clone)]
pub struct SineTransform {
    n: usize,
    /// Row-major `table[(i-1) * n + (k-1)] = sin(k pi i / (n+1))`.
    table: Vec<f64>,
}

impl SineTransform {
    pub fn new(n: usize) -> Self {
        let mut table = vec![0.0; n * n];
        let np1 = (n + 1) as f64;
        for i in 0..n {
            for k in 0..n {
                // Reduce the product modulo 2(n+1) so the argument stays in [0, 2 pi).
                let m = ((i + 1) * (k + 1)) % (2 * (n + 1));
                table[i * n + k] = (PI * m as f64 / np1).sin();
            }
        }
        SineTransform { n, table }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `sin(k pi i / (n+1))` for zero-based node `i` and zero-based mode `k`.
    #[inline]
    pub fn basis(&self, i: usize, k: usize) -> f64 {
        self.table[i * self.n + k]
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(BeamError::DimensionMismatch { expected: self.n, found: len });
        }
        Ok(())
    }

    pub fn synthesize(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        self.check(coeffs.len())?;
        Ok(self.synthesize_unchecked(coeffs))
    }

    pub fn analyze(&self, values: &[f64]) -> Result<Vec<f64>> {
        self.check(values.len())?;
        Ok(self.analyze_unchecked(values))
    }

    pub(crate) fn synthesize_unchecked(&self, coeffs: &[f64]) -> Vec<f64> {
        self.table
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(coeffs).map(|(s, c)| s * c).sum())
            .collect()
    }

    pub(crate) fn analyze_unchecked(&self, values: &[f64]) -> Vec<f64> {
        let scale = 2.0 / (self.n + 1) as f64;
        let mut out = vec![0.0; self.n];
        for (row, &v) in self.table.chunks_exact(self.n).zip(values) {
            for (o, s) in out.iter_mut().zip(row) {
                *o += s * v;
            }
        }
        out.iter_mut().for_each(|o| *o *= scale);
        out
    }

    /// Diagonal of `S diag(w) S^{-1}`: the modal image of a nodal
    /// multiplication operator, restricted to its diagonal.
    pub fn projected_diagonal(&self, weights: &[f64]) -> Vec<f64> {
        let scale = 2.0 / (self.n + 1) as f64;
        let mut out = vec![0.0; self.n];
        for (row, &w) in self.table.chunks_exact(self.n).zip(weights) {
            for (o, s) in out.iter_mut().zip(row) {
                *o += s * s * w;
            }
        }
        out.iter_mut().for_each(|o| *o *= scale);
        out
    }
}

/// Nodal samples of `sum_k c_k sin(k pi (x - a) / L)` on the grid.
pub fn modal_to_nodal(coeffs: &[f64], grid: &Grid) -> Result<Vec<f64>> {
    SineTransform::new(grid.n_interior()).synthesize(coeffs)
}

/// Sine coefficients of the interior nodal values (inverse of [`modal_to_nodal`]).
pub fn nodal_to_modal(values: &[f64], grid: &Grid) -> Result<Vec<f64>> {
    SineTransform::new(grid.n_interior()).analyze(values)
}
