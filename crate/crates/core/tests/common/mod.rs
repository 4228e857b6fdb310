//! Reference solutions written independently of the library internals:
//! a closed-form damped oscillator, an explicit RK4 integrator of the
//! finite-difference semi-discrete system, and a preconditioned gradient
//! descent for the stationary problem. Operators are rebuilt here from the
//! five-point stencil instead of reusing `Operator4`.

#![allow(dead_code)]

use std::f64::consts::PI;

use beam_core::discretization::{Discretization, Grid, Scheme};
use beam_core::model::{BeamScenario, DampingLaw, Forcing, RestoringLaw, SpatialProfile};

pub fn fd(n: usize) -> Discretization {
    Discretization::new(Grid::new(0.0, 1.0, n).unwrap(), Scheme::FiniteDifference).unwrap()
}

pub fn spectral(n: usize) -> Discretization {
    Discretization::new(Grid::new(0.0, 1.0, n).unwrap(), Scheme::SpectralSine).unwrap()
}

/// Interior nodes of the uniform grid on (0, 1).
pub fn nodes(n: usize) -> Vec<f64> {
    let h = 1.0 / (n + 1) as f64;
    (1..=n).map(|i| i as f64 * h).collect()
}

pub fn sine(n: usize, k: usize) -> Vec<f64> {
    nodes(n).iter().map(|x| (k as f64 * PI * x).sin()).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// `m = sigma = 1`, `c = 0.1`, `d = 0`, no restoring force or load, one sine mode.
pub fn damped_single_mode() -> BeamScenario {
    BeamScenario {
        damping: DampingLaw::LinearPlusQuadratic { c: 0.1, d: 0.0 },
        restoring: RestoringLaw::Zero,
        forcing: Forcing::Zero,
        u0: SpatialProfile::SineMode { amplitude: 1.0, mode: 1 },
        u1: SpatialProfile::Zero,
        t_end: 1.0,
        dt: 1e-3,
        ..BeamScenario::default()
    }
}

/// Underdamped `m q'' + c q' + k q = 0`, `q(0) = q0`, `q'(0) = 0`.
pub struct Oscillator {
    pub m: f64,
    pub c: f64,
    pub k: f64,
    pub q0: f64,
}

impl Oscillator {
    pub fn single_mode() -> Self {
        Oscillator { m: 1.0, c: 0.1, k: PI.powi(4), q0: 1.0 }
    }

    fn rates(&self) -> (f64, f64) {
        let alpha = self.c / (2.0 * self.m);
        (alpha, (self.k / self.m - alpha * alpha).sqrt())
    }

    pub fn q(&self, t: f64) -> f64 {
        let (a, w) = self.rates();
        self.q0 * (-a * t).exp() * ((w * t).cos() + a / w * (w * t).sin())
    }

    pub fn qdot(&self, t: f64) -> f64 {
        let (a, w) = self.rates();
        -self.q0 * (-a * t).exp() * (a * a + w * w) / w * (w * t).sin()
    }

    /// `m/2 q'^2 + k/2 q^2`, scaled by the L2 norm of the mode shape (1/2 on (0,1)).
    pub fn beam_energy(&self, t: f64) -> f64 {
        0.5 * (0.5 * self.m * self.qdot(t).powi(2) + 0.5 * self.k * self.q(t).powi(2))
    }
}

/// `A u` for the Navier five-point stencil with odd reflection at the ends.
pub fn stencil_apply(u: &[f64], h: f64) -> Vec<f64> {
    let n = u.len();
    let at = |i: isize| -> f64 {
        if i < 0 {
            if i == -1 { 0.0 } else { -u[(-i - 2) as usize] }
        } else if i as usize >= n {
            if i as usize == n { 0.0 } else { -u[2 * n - i as usize] }
        } else {
            u[i as usize]
        }
    };
    let h4 = h.powi(4);
    (0..n as isize)
        .map(|i| (at(i - 2) - 4.0 * at(i - 1) + 6.0 * at(i) - 4.0 * at(i + 1) + at(i + 2)) / h4)
        .collect()
}

/// Dense stencil matrix.
pub fn stencil_matrix(n: usize, h: f64) -> Vec<Vec<f64>> {
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cols.push(stencil_apply(&e, h));
    }
    (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect()
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, p);
        b.swap(col, p);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// Semi-discrete right-hand side in nodal values.
pub struct NodalSystem<F1, F2> {
    pub m: f64,
    pub sigma: f64,
    pub h: f64,
    pub f: Vec<f64>,
    pub damping: F1,
    pub restoring: F2,
}

impl<F1: Fn(f64) -> f64, F2: Fn(f64) -> f64> NodalSystem<F1, F2> {
    fn accel(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let au = stencil_apply(u, self.h);
        (0..u.len())
            .map(|i| (self.f[i] - (self.damping)(v[i]) - self.sigma * au[i] - (self.restoring)(u[i])) / self.m)
            .collect()
    }

    /// Classical RK4 from `(u, v)` over `steps` steps of size `dt`.
    pub fn rk4(&self, mut u: Vec<f64>, mut v: Vec<f64>, dt: f64, steps: usize) -> (Vec<f64>, Vec<f64>) {
        let n = u.len();
        let axpy = |x: &[f64], a: f64, y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(p, q)| p + a * q).collect() };
        for _ in 0..steps {
            let (k1u, k1v) = (v.clone(), self.accel(&u, &v));
            let (u2, v2) = (axpy(&u, 0.5 * dt, &k1u), axpy(&v, 0.5 * dt, &k1v));
            let (k2u, k2v) = (v2.clone(), self.accel(&u2, &v2));
            let (u3, v3) = (axpy(&u, 0.5 * dt, &k2u), axpy(&v, 0.5 * dt, &k2v));
            let (k3u, k3v) = (v3.clone(), self.accel(&u3, &v3));
            let (u4, v4) = (axpy(&u, dt, &k3u), axpy(&v, dt, &k3v));
            let (k4u, k4v) = (v4.clone(), self.accel(&u4, &v4));
            for i in 0..n {
                u[i] += dt / 6.0 * (k1u[i] + 2.0 * k2u[i] + 2.0 * k3u[i] + k4u[i]);
                v[i] += dt / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
            }
        }
        (u, v)
    }
}

/// RK4 reference for the canonical nonlinear beam (`c = d = 1`, cubic
/// `kappa = 1`, `f = sin(pi x)`, `u0 = 0.5 sin(pi x)`) at time `t`.
pub fn canonical_rk4(n: usize, dt: f64, t: f64) -> Vec<f64> {
    let sys = NodalSystem {
        m: 1.0,
        sigma: 1.0,
        h: 1.0 / (n + 1) as f64,
        f: sine(n, 1),
        damping: |v: f64| v + v.abs() * v,
        restoring: |u: f64| u * u * u,
    };
    let u0 = sine(n, 1).iter().map(|x| 0.5 * x).collect();
    sys.rk4(u0, vec![0.0; n], dt, (t / dt).round() as usize).0
}

/// Minimizer of `sigma/2 (Au, u)_h + h sum f2(u) - h (f, u)` by gradient
/// descent in the metric of `sigma A`, i.e. `u <- u - (sigma A)^-1 grad`.
/// Returns the iterate and the max-norm of the final gradient.
pub fn stationary_descent(
    n: usize,
    sigma: f64,
    force: impl Fn(f64) -> f64,
    f: &[f64],
    max_iter: usize,
) -> (Vec<f64>, f64) {
    let h = 1.0 / (n + 1) as f64;
    let a: Vec<Vec<f64>> = stencil_matrix(n, h).into_iter().map(|r| r.into_iter().map(|x| sigma * x).collect()).collect();
    let mut u = vec![0.0; n];
    let mut grad_norm = f64::INFINITY;
    for _ in 0..max_iter {
        let au = stencil_apply(&u, h);
        let g: Vec<f64> = (0..n).map(|i| sigma * au[i] + force(u[i]) - f[i]).collect();
        grad_norm = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let step = dense_solve(a.clone(), g);
        let size = step.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for i in 0..n {
            u[i] -= step[i];
        }
        if size < 1e-16 {
            break;
        }
    }
    (u, grad_norm)
}
