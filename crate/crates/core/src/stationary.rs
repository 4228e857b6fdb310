//! Stationary problem `sigma u'''' + F2(u) = f` with Navier conditions,
//! solved as the minimization of the static potential energy
//! `Sigma_T(u) = sigma/2 |u|^2_{H2*} + V(u) - (f, u)`.
//!
//! `Sigma_T` is strictly convex for convex `f2`, so Newton's method on its
//! gradient with an Armijo backtracking search converges to the unique
//! minimizer. The Hessian `sigma A + diag(F2'(u))` is pentadiagonal for
//! finite differences and dense (modal coupling) for the spectral scheme.

use nalgebra::{DMatrix, DVector};

use crate::discretization::{Discretization, Scheme};
use crate::error::{BeamError, Result};
use crate::model::BeamScenario;
use crate::settings::SolverSettings;

#[derive(Debug, Clone, PartialEq)]
pub struct StationarySolution {
    /// Minimizer in state coordinates.
    pub u_hat: Vec<f64>,
    pub sigma_t_value: f64,
    /// Max-norm of the strong residual at `u_hat`.
    pub grad_norm: f64,
    pub newton_iters: usize,
    /// Resolution limit of the residual at `u_hat`; the solver stops once
    /// `grad_norm <= max(stationary_tol, residual_floor)`.
    pub residual_floor: f64,
}

/// `Sigma_T(u) = sigma/2 (u,u)_{H2*} + V(u) - (f,u)`.
#[allow(non_snake_case)]
pub fn sigma_T(u: &[f64], scenario: &BeamScenario, disc: &Discretization) -> Result<f64> {
    disc.check_dim(u.len())?;
    let f = disc.from_nodal(&scenario.forcing.sample(disc.grid())?)?;
    Ok(Problem { scenario, disc, f }.energy(u))
}

/// Max-norm of `sigma A u + F2(u) - f` in state coordinates.
pub fn residual_bvp(u: &[f64], scenario: &BeamScenario, disc: &Discretization) -> Result<f64> {
    disc.check_dim(u.len())?;
    let f = disc.from_nodal(&scenario.forcing.sample(disc.grid())?)?;
    Ok(max_abs(&Problem { scenario, disc, f }.gradient(u)))
}

fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

struct Problem<'a> {
    scenario: &'a BeamScenario,
    disc: &'a Discretization,
    f: Vec<f64>,
}

impl Problem<'_> {
    fn energy(&self, u: &[f64]) -> f64 {
        let d = self.disc;
        0.5 * self.scenario.sigma * d.h2star_norm_sq_unchecked(u)
            + d.quadrature().potential_unchecked(&d.to_nodal_unchecked(u), &self.scenario.restoring)
            - d.l2_inner_unchecked(&self.f, u)
    }

    fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let d = self.disc;
        let law = &self.scenario.restoring;
        let nodal_force: Vec<f64> = d.to_nodal_unchecked(u).iter().map(|&x| law.force(x)).collect();
        let load = d.from_nodal_unchecked(&nodal_force);
        let au = d.stiffness_unchecked(u);
        au.iter()
            .zip(&load)
            .zip(&self.f)
            .map(|((a, l), f)| self.scenario.sigma * a + l - f)
            .collect()
    }

    fn floor(&self, u: &[f64]) -> f64 {
        self.disc.stiffness_roundoff(self.scenario.sigma, u) + f64::EPSILON * max_abs(&self.f)
    }

    /// Solves `(sigma A + P diag(curvature) P^-1) x = rhs`.
    fn solve_hessian(&self, curvature: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
        let d = self.disc;
        let sigma = self.scenario.sigma;
        match d.scheme() {
            Scheme::FiniteDifference => {
                let mut h = d.operator().bands().expect("finite differences are banded");
                h.off1.iter_mut().for_each(|x| *x *= sigma);
                h.off2.iter_mut().for_each(|x| *x *= sigma);
                for (hd, c) in h.diag.iter_mut().zip(curvature) {
                    *hd = sigma * *hd + c;
                }
                Ok(h.cholesky()?.solve(rhs))
            }
            Scheme::SpectralSine => {
                let t = d.transform().expect("spectral scheme has a transform");
                let n = d.dim();
                let scale = 2.0 / (n + 1) as f64;
                let mut h = DMatrix::<f64>::zeros(n, n);
                for (i, &c) in curvature.iter().enumerate() {
                    if c == 0.0 {
                        continue;
                    }
                    for k in 0..n {
                        let sk = scale * c * t.basis(i, k);
                        for l in 0..n {
                            h[(k, l)] += sk * t.basis(i, l);
                        }
                    }
                }
                for k in 0..n {
                    h[(k, k)] += sigma * d.operator().eigenvalue(k + 1);
                }
                let chol = h.cholesky().ok_or(BeamError::SingularJacobian)?;
                Ok(chol.solve(&DVector::from_column_slice(rhs)).as_slice().to_vec())
            }
        }
    }

    /// Minimizer of `Sigma_T` with `F2` switched off.
    fn linear_warm_start(&self) -> Result<Vec<f64>> {
        self.solve_hessian(&vec![0.0; self.disc.dim()], &self.f)
    }
}

/// Newton iteration with backtracking on `Sigma_T`. Starts from
/// `initial_guess` when given, otherwise from the linear solve with `F2 = 0`.
pub fn solve_stationary(
    scenario: &BeamScenario,
    disc: &Discretization,
    initial_guess: Option<&[f64]>,
    settings: &SolverSettings,
) -> Result<StationarySolution> {
    let f = disc.from_nodal(&scenario.forcing.sample(disc.grid())?)?;
    let problem = Problem { scenario, disc, f };
    let law = &scenario.restoring;

    let mut u = match initial_guess {
        Some(g) => {
            disc.check_dim(g.len())?;
            g.to_vec()
        }
        None => problem.linear_warm_start()?,
    };
    let mut energy = problem.energy(&u);

    for iter in 0..=settings.stationary_max_iter {
        let nodal = disc.to_nodal_unchecked(&u);
        let curvature: Vec<f64> = nodal.iter().map(|&x| law.stiffness(x)).collect();
        if let Some((node, &c)) = curvature.iter().enumerate().find(|(_, c)| **c < 0.0) {
            return Err(BeamError::NonConvexDetected { node, curvature: c });
        }
        let g = problem.gradient(&u);
        let residual = max_abs(&g);
        let floor = problem.floor(&u);
        if !residual.is_finite() {
            break;
        }
        if residual <= settings.stationary_tol.max(floor) {
            return Ok(StationarySolution {
                u_hat: u,
                sigma_t_value: energy,
                grad_norm: residual,
                newton_iters: iter,
                residual_floor: floor,
            });
        }
        if iter == settings.stationary_max_iter {
            return Err(BeamError::MaxIterExceeded { iterations: iter, residual });
        }

        let rhs: Vec<f64> = g.iter().map(|x| -x).collect();
        let dir = problem.solve_hessian(&curvature, &rhs)?;
        let slope = disc.l2_inner_unchecked(&g, &dir);
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = u.iter().zip(&dir).map(|(a, d)| a + alpha * d).collect();
            let e = problem.energy(&trial);
            // Near the minimizer the energy decrease drops below roundoff;
            // a residual decrease is accepted there instead.
            let resolvable = (energy - e).abs() > 1e3 * f64::EPSILON * (energy.abs() + 1.0);
            let armijo = e <= energy + 1e-4 * alpha * slope;
            if armijo || (!resolvable && max_abs(&problem.gradient(&trial)) < residual) {
                accepted = Some((trial, e));
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((trial, e)) => {
                u = trial;
                energy = e;
            }
            None => return Err(BeamError::MaxIterExceeded { iterations: iter + 1, residual }),
        }
    }
    Err(BeamError::MaxIterExceeded { iterations: settings.stationary_max_iter, residual: f64::NAN })
}
