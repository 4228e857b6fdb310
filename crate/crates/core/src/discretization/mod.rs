//! Spatial semi-discretization of the fourth derivative with Navier
//! (simply supported) boundary conditions.
//!
//! Two schemes share one interface. Finite differences store nodal values
//! and use the pentadiagonal stencil obtained from antisymmetric ghost nodes.
//! The spectral scheme stores sine coefficients; nonlinear terms are applied
//! at the nodes and projected back with the discrete sine transform. In both
//! schemes the discrete L2 pairing equals the trapezoid rule on nodal values,
//! so energies computed in either representation agree.

mod banded;
mod grid;
mod transform;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

pub use banded::{BandedCholesky, SymPentadiagonal};
pub use grid::Grid;
pub use transform::{modal_to_nodal, nodal_to_modal, SineTransform};

use crate::error::{BeamError, Result};
use crate::model::RestoringLaw;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    FiniteDifference,
    SpectralSine,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::FiniteDifference => "fd",
            Scheme::SpectralSine => "spectral",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = BeamError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fd" | "finite_difference" => Ok(Scheme::FiniteDifference),
            "spectral" | "spectral_sine" => Ok(Scheme::SpectralSine),
            other => Err(BeamError::InvalidArgument(format!("unknown scheme `{other}`"))),
        }
    }
}

/// Discrete `d^4/dx^4` on the interior space.
#[derive(Debug, Clone, PartialEq)]
pub enum Operator4 {
    /// Stencil `(1, -4, 6, -4, 1) / h^4`, first and last rows `(5, -4, 1) / h^4`.
    FiniteDifference { n: usize, h: f64 },
    /// Diagonal in the sine basis, `lambda_k = (k pi / L)^4`.
    SpectralSine { eigenvalues: Vec<f64>, length: f64 },
}

/// Second differences `u[i-1] - 2 u[i] + u[i+1]` with zero boundary values,
/// formed from first differences to limit cancellation.
fn second_differences(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let mut out = Vec::with_capacity(n);
    let mut left = u[0]; // u[0] - 0
    for i in 0..n {
        let right = if i + 1 < n { u[i + 1] - u[i] } else { -u[i] };
        out.push(right - left);
        left = right;
    }
    out
}

impl Operator4 {
    pub fn dim(&self) -> usize {
        match self {
            Operator4::FiniteDifference { n, .. } => *n,
            Operator4::SpectralSine { eigenvalues, .. } => eigenvalues.len(),
        }
    }

    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), u.len())?;
        Ok(self.apply_unchecked(u))
    }

    pub(crate) fn apply_unchecked(&self, u: &[f64]) -> Vec<f64> {
        match self {
            Operator4::FiniteDifference { h, .. } => {
                // A = D2 * D2 with the Dirichlet second difference D2; the
                // ghost reflection u[-1] = -u[1] is exactly this factorization.
                let scale = 1.0 / h.powi(4);
                let mut w = second_differences(&second_differences(u));
                w.iter_mut().for_each(|x| *x *= scale);
                w
            }
            Operator4::SpectralSine { eigenvalues, .. } => {
                eigenvalues.iter().zip(u).map(|(l, c)| l * c).collect()
            }
        }
    }

    /// Quadratic form `(A u, u)` in the discrete L2 pairing of the scheme.
    pub(crate) fn energy_form(&self, u: &[f64]) -> f64 {
        match self {
            Operator4::FiniteDifference { h, .. } => {
                let s: f64 = second_differences(u).iter().map(|x| x * x).sum();
                s / h.powi(3)
            }
            Operator4::SpectralSine { eigenvalues, length } => {
                0.5 * length * eigenvalues.iter().zip(u).map(|(l, c)| l * c * c).sum::<f64>()
            }
        }
    }

    /// Banded representation (finite differences only).
    pub fn bands(&self) -> Option<SymPentadiagonal> {
        match self {
            Operator4::FiniteDifference { n, h } => {
                let s = 1.0 / h.powi(4);
                let mut m = SymPentadiagonal::zeros(*n);
                for (i, d) in m.diag.iter_mut().enumerate() {
                    *d = if i == 0 || i + 1 == *n { 5.0 * s } else { 6.0 * s };
                }
                m.off1.iter_mut().for_each(|v| *v = -4.0 * s);
                m.off2.iter_mut().for_each(|v| *v = s);
                Some(m)
            }
            Operator4::SpectralSine { .. } => None,
        }
    }

    /// Eigenvalue belonging to the `k`-th sine mode (`k >= 1`).
    pub fn eigenvalue(&self, k: usize) -> f64 {
        match self {
            Operator4::FiniteDifference { n, h } => {
                let len = (*n + 1) as f64 * h;
                let s = (k as f64 * PI * h / (2.0 * len)).sin();
                (4.0 * s * s / (h * h)).powi(2)
            }
            Operator4::SpectralSine { eigenvalues, .. } => eigenvalues[k - 1],
        }
    }

    /// Infinity norm of the matrix.
    pub fn max_row_sum(&self) -> f64 {
        match self {
            Operator4::FiniteDifference { h, .. } => 16.0 / h.powi(4),
            Operator4::SpectralSine { eigenvalues, .. } => eigenvalues.last().copied().unwrap_or(0.0),
        }
    }
}

pub fn build_operator(grid: &Grid, scheme: Scheme) -> Result<Operator4> {
    let n = grid.n_interior();
    if n < Grid::MIN_NODES {
        return Err(BeamError::InvalidGrid(format!("need at least {} interior nodes", Grid::MIN_NODES)));
    }
    Ok(match scheme {
        Scheme::FiniteDifference => Operator4::FiniteDifference { n, h: grid.h() },
        Scheme::SpectralSine => {
            let len = grid.length();
            let eigenvalues = (1..=n).map(|k| (k as f64 * PI / len).powi(4)).collect();
            Operator4::SpectralSine { eigenvalues, length: len }
        }
    })
}

/// Composite trapezoid rule on the zero-extended nodal function: weight `h`
/// at each interior node and `h/2` at each endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureRule {
    n: usize,
    h: f64,
}

impl QuadratureRule {
    pub fn new(grid: &Grid) -> Self {
        QuadratureRule { n: grid.n_interior(), h: grid.h() }
    }

    pub fn weight(&self) -> f64 {
        self.h
    }

    pub fn endpoint_weight(&self) -> f64 {
        0.5 * self.h
    }

    pub fn weights(&self) -> Vec<f64> {
        vec![self.h; self.n]
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        check_len(self.n, u.len())?;
        check_len(self.n, v.len())?;
        Ok(self.h * u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>())
    }

    /// `int |u|^p dx`.
    pub fn lp_norm_pow(&self, u: &[f64], p: f64) -> Result<f64> {
        check_len(self.n, u.len())?;
        if !(p >= 1.0) || !p.is_finite() {
            return Err(BeamError::InvalidArgument(format!("p must lie in [1, inf), got {p}")));
        }
        Ok(self.h * u.iter().map(|x| x.abs().powf(p)).sum::<f64>())
    }

    pub fn lp_norm(&self, u: &[f64], p: f64) -> Result<f64> {
        Ok(self.lp_norm_pow(u, p)?.powf(1.0 / p))
    }

    /// `V(u) = int f2(u) dx`, endpoints contributing `f2(0)`.
    pub fn potential(&self, u: &[f64], law: &RestoringLaw) -> Result<f64> {
        check_len(self.n, u.len())?;
        Ok(self.potential_unchecked(u, law))
    }

    pub(crate) fn potential_unchecked(&self, u: &[f64], law: &RestoringLaw) -> f64 {
        let interior: f64 = u.iter().map(|&x| law.potential(x)).sum();
        self.h * interior + 2.0 * self.endpoint_weight() * law.potential(0.0)
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(BeamError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Grid, operator, quadrature and (for the spectral scheme) the sine
/// transform. State vectors are nodal values for finite differences and
/// sine coefficients for the spectral scheme; both have `n_interior` entries.
#[derive(Debug, Clone)]
pub struct Discretization {
    grid: Grid,
    scheme: Scheme,
    operator: Operator4,
    quad: QuadratureRule,
    transform: Option<SineTransform>,
}

impl Discretization {
    pub fn new(grid: Grid, scheme: Scheme) -> Result<Self> {
        let operator = build_operator(&grid, scheme)?;
        let transform = match scheme {
            Scheme::FiniteDifference => None,
            Scheme::SpectralSine => Some(SineTransform::new(grid.n_interior())),
        };
        Ok(Discretization { grid, scheme, operator, quad: QuadratureRule::new(&grid), transform })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn operator(&self) -> &Operator4 {
        &self.operator
    }

    pub fn quadrature(&self) -> &QuadratureRule {
        &self.quad
    }

    pub fn transform(&self) -> Option<&SineTransform> {
        self.transform.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.grid.n_interior()
    }

    pub fn check_dim(&self, len: usize) -> Result<()> {
        check_len(self.dim(), len)
    }

    /// Nodal values of a state vector.
    pub fn to_nodal(&self, state: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(state.len())?;
        Ok(self.to_nodal_unchecked(state))
    }

    /// State vector of nodal values; for the spectral scheme this is the
    /// L2 projection onto the sine modes.
    pub fn from_nodal(&self, nodal: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(nodal.len())?;
        Ok(self.from_nodal_unchecked(nodal))
    }

    pub(crate) fn to_nodal_unchecked(&self, state: &[f64]) -> Vec<f64> {
        match &self.transform {
            None => state.to_vec(),
            Some(t) => t.synthesize_unchecked(state),
        }
    }

    pub(crate) fn from_nodal_unchecked(&self, nodal: &[f64]) -> Vec<f64> {
        match &self.transform {
            None => nodal.to_vec(),
            Some(t) => t.analyze_unchecked(nodal),
        }
    }

    /// `A u` in state coordinates.
    pub fn stiffness(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.operator.apply(u)
    }

    pub(crate) fn stiffness_unchecked(&self, u: &[f64]) -> Vec<f64> {
        self.operator.apply_unchecked(u)
    }

    /// Squared `H^2_*` norm, `int u_xx^2 dx`, realized as `(A u, u)`.
    pub fn h2star_norm_sq(&self, u: &[f64]) -> Result<f64> {
        self.check_dim(u.len())?;
        Ok(self.operator.energy_form(u))
    }

    pub(crate) fn h2star_norm_sq_unchecked(&self, u: &[f64]) -> f64 {
        self.operator.energy_form(u)
    }

    /// Discrete L2 inner product of two state vectors.
    pub fn l2_inner(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        self.check_dim(u.len())?;
        self.check_dim(v.len())?;
        Ok(self.l2_inner_unchecked(u, v))
    }

    pub(crate) fn l2_inner_unchecked(&self, u: &[f64], v: &[f64]) -> f64 {
        let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
        match self.scheme {
            Scheme::FiniteDifference => self.quad.weight() * dot,
            Scheme::SpectralSine => 0.5 * self.grid.length() * dot,
        }
    }

    pub fn l2_norm(&self, u: &[f64]) -> Result<f64> {
        Ok(self.l2_inner(u, u)?.sqrt())
    }

    /// `V(u)` for a state vector.
    pub fn potential(&self, u: &[f64], law: &RestoringLaw) -> Result<f64> {
        self.check_dim(u.len())?;
        Ok(self.quad.potential_unchecked(&self.to_nodal_unchecked(u), law))
    }

    /// Size below which the strong residual `sigma A u + ...` cannot be
    /// resolved in double precision: `eps * sigma * |A|_inf * |u|_inf` for
    /// nodal storage, and the largest modal term times `eps` for sine storage.
    pub fn stiffness_roundoff(&self, sigma: f64, u: &[f64]) -> f64 {
        match &self.operator {
            Operator4::FiniteDifference { .. } => {
                let umax = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                f64::EPSILON * sigma * self.operator.max_row_sum() * umax
            }
            Operator4::SpectralSine { eigenvalues, .. } => {
                let top = eigenvalues.iter().zip(u).fold(0.0f64, |m, (l, c)| m.max((l * c).abs()));
                f64::EPSILON * sigma * top
            }
        }
    }
}

/// Squared `H^2_*` norm of a state vector.
pub fn h2star_norm_sq(u: &[f64], disc: &Discretization) -> Result<f64> {
    disc.h2star_norm_sq(u)
}

/// Quadrature-weighted inner product of nodal values.
pub fn l2_inner(u: &[f64], v: &[f64], quad: &QuadratureRule) -> Result<f64> {
    quad.inner(u, v)
}

/// Quadrature `L^p` norm of nodal values.
pub fn lp_norm(u: &[f64], p: f64, quad: &QuadratureRule) -> Result<f64> {
    quad.lp_norm(u, p)
}

/// `V(u) = int f2(u(x)) dx` of nodal values.
#[allow(non_snake_case)]
pub fn potential_V(u: &[f64], restoring: &RestoringLaw, quad: &QuadratureRule) -> Result<f64> {
    quad.potential(u, restoring)
}
