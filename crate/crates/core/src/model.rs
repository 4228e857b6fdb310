//! Problem data for the damped beam: physical constants, the damping and
//! restoring nonlinearities, time-independent forcing and initial data.
//!
//! Every law here is a pure function of its parameters, so a validated
//! [`BeamScenario`] can be shared freely between threads.

use std::f64::consts::PI;
use std::fmt;

use crate::discretization::Grid;
use crate::error::{BeamError, Result};

/// Sample grid used by the hypothesis checks in [`validate_scenario`].
pub const CHECK_RANGE: (f64, f64) = (-10.0, 10.0);
pub const CHECK_POINTS: usize = 4001;

/// Nonlinear damping `F1` acting on the velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DampingLaw {
    /// `F1(x) = c x + d |x| x`
    LinearPlusQuadratic { c: f64, d: f64 },
    /// `F1(x) = delta |x|^(p-2) x`
    PowerLaw { delta: f64, p: f64 },
}

impl DampingLaw {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            DampingLaw::LinearPlusQuadratic { c, d } => c * x + d * x.abs() * x,
            DampingLaw::PowerLaw { delta, p } => delta * x.abs().powf(p - 2.0) * x,
        }
    }

    /// Derivative used by the Newton matrix. At `x = 0` this is the
    /// right-sided value, e.g. `c` for the linear-plus-quadratic law.
    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            DampingLaw::LinearPlusQuadratic { c, d } => c + 2.0 * d * x.abs(),
            DampingLaw::PowerLaw { delta, p } => delta * (p - 1.0) * x.abs().powf(p - 2.0),
        }
    }

    pub fn is_undamped(&self) -> bool {
        match *self {
            DampingLaw::LinearPlusQuadratic { c, d } => c == 0.0 && d == 0.0,
            DampingLaw::PowerLaw { delta, .. } => delta == 0.0,
        }
    }
}

impl fmt::Display for DampingLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DampingLaw::LinearPlusQuadratic { c, d } => write!(f, "c*x + d*|x|*x (c={c}, d={d})"),
            DampingLaw::PowerLaw { delta, p } => write!(f, "delta*|x|^(p-2)*x (delta={delta}, p={p})"),
        }
    }
}

/// Convex restoring potential `f2` with force `F2 = f2'` and stiffness `F2' = f2''`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RestoringLaw {
    Zero,
    /// `f2 = kappa x^2 / 2`
    Linear { kappa: f64 },
    /// `f2 = kappa x^4 / 4`
    Cubic { kappa: f64 },
    /// Smooth one-sided spring, `F2 ~ kappa * max(x, 0)` away from a layer of
    /// width `eps` around the origin. `f2 = kappa eps^2 g(x/eps)` with
    /// `g(z) = ((z^2 + 1) Phi(z) + z phi(z)) / 2`, so `f2'' = kappa Phi(x/eps)`.
    SmoothedOneSided { kappa: f64, eps: f64 },
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

impl RestoringLaw {
    /// Potential density `f2(x)`.
    pub fn potential(&self, x: f64) -> f64 {
        match *self {
            RestoringLaw::Zero => 0.0,
            RestoringLaw::Linear { kappa } => 0.5 * kappa * x * x,
            RestoringLaw::Cubic { kappa } => 0.25 * kappa * x * x * x * x,
            RestoringLaw::SmoothedOneSided { kappa, eps } => {
                let z = x / eps;
                let g = 0.5 * ((z * z + 1.0) * std_normal_cdf(z) + z * std_normal_pdf(z));
                kappa * eps * eps * g
            }
        }
    }

    /// Restoring force `F2(x) = f2'(x)`.
    pub fn force(&self, x: f64) -> f64 {
        match *self {
            RestoringLaw::Zero => 0.0,
            RestoringLaw::Linear { kappa } => kappa * x,
            RestoringLaw::Cubic { kappa } => kappa * x * x * x,
            RestoringLaw::SmoothedOneSided { kappa, eps } => {
                let z = x / eps;
                kappa * eps * (z * std_normal_cdf(z) + std_normal_pdf(z))
            }
        }
    }

    /// Stiffness `F2'(x) = f2''(x)`.
    pub fn stiffness(&self, x: f64) -> f64 {
        match *self {
            RestoringLaw::Zero => 0.0,
            RestoringLaw::Linear { kappa } => kappa,
            RestoringLaw::Cubic { kappa } => 3.0 * kappa * x * x,
            RestoringLaw::SmoothedOneSided { kappa, eps } => kappa * std_normal_cdf(x / eps),
        }
    }

    /// Two-point discrete gradient: `(f2(y) - f2(x)) / (y - x)`, falling back
    /// to the midpoint force when the points coincide. Exact closed forms are
    /// used for the polynomial laws so no cancellation occurs.
    pub fn discrete_gradient(&self, x: f64, y: f64) -> f64 {
        match *self {
            RestoringLaw::Zero => 0.0,
            RestoringLaw::Linear { kappa } => 0.5 * kappa * (x + y),
            RestoringLaw::Cubic { kappa } => 0.25 * kappa * (x + y) * (x * x + y * y),
            RestoringLaw::SmoothedOneSided { kappa, eps } => {
                let dx = y - x;
                let mid = 0.5 * (x + y);
                // The quotient loses digits as dx -> 0; below the switch the
                // midpoint expansion is exact to O(dx^4).
                if dx.abs() > DG_SWITCH * eps {
                    (self.potential(y) - self.potential(x)) / dx
                } else {
                    let curvature_rate = kappa * std_normal_pdf(mid / eps) / eps;
                    self.force(mid) + curvature_rate * dx * dx / 24.0
                }
            }
        }
    }

    /// A point where `F2` vanishes, if the law has one.
    pub fn declared_root(&self) -> Option<f64> {
        match self {
            RestoringLaw::SmoothedOneSided { .. } => None,
            _ => Some(0.0),
        }
    }
}

/// Relative (to the layer width) switch between quotient and midpoint forms
/// of the smoothed law's discrete gradient.
const DG_SWITCH: f64 = 1e-5;

impl fmt::Display for RestoringLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RestoringLaw::Zero => write!(f, "zero"),
            RestoringLaw::Linear { kappa } => write!(f, "linear (kappa={kappa})"),
            RestoringLaw::Cubic { kappa } => write!(f, "cubic (kappa={kappa})"),
            RestoringLaw::SmoothedOneSided { kappa, eps } => {
                write!(f, "smoothed one-sided (kappa={kappa}, eps={eps})")
            }
        }
    }
}

/// Spatial load. All variants are time-independent.
#[derive(Debug, Clone, PartialEq)]
pub enum Forcing {
    Zero,
    SineMode { amplitude: f64, mode: u32 },
    /// Values on the full grid, endpoints included (`n_interior + 2` entries).
    Samples(Vec<f64>),
}

impl Forcing {
    pub fn sample(&self, grid: &Grid) -> Result<Vec<f64>> {
        match self {
            Forcing::Zero => Ok(vec![0.0; grid.n_interior()]),
            Forcing::SineMode { amplitude, mode } => Ok(sine_samples(grid, *amplitude, *mode)),
            Forcing::Samples(values) => interior_of(grid, values),
        }
    }

    pub fn is_time_independent(&self) -> bool {
        true
    }
}

/// Initial displacement or velocity profile.
#[derive(Debug, Clone, PartialEq)]
pub enum SpatialProfile {
    Zero,
    SineMode { amplitude: f64, mode: u32 },
    /// Values on the full grid, endpoints included (`n_interior + 2` entries).
    Samples(Vec<f64>),
}

impl SpatialProfile {
    pub fn sample(&self, grid: &Grid) -> Result<Vec<f64>> {
        match self {
            SpatialProfile::Zero => Ok(vec![0.0; grid.n_interior()]),
            SpatialProfile::SineMode { amplitude, mode } => Ok(sine_samples(grid, *amplitude, *mode)),
            SpatialProfile::Samples(values) => interior_of(grid, values),
        }
    }

    /// Values at the two endpoints (`None` when they cannot be determined).
    fn endpoint_values(&self) -> Option<(f64, f64)> {
        match self {
            SpatialProfile::Zero => Some((0.0, 0.0)),
            SpatialProfile::SineMode { amplitude, mode } => {
                Some((0.0, amplitude * (*mode as f64 * PI).sin()))
            }
            SpatialProfile::Samples(values) => match (values.first(), values.last()) {
                (Some(&l), Some(&r)) => Some((l, r)),
                _ => None,
            },
        }
    }
}

fn sine_samples(grid: &Grid, amplitude: f64, mode: u32) -> Vec<f64> {
    let (a, len) = (grid.a(), grid.length());
    grid.nodes()
        .map(|x| amplitude * (mode as f64 * PI * (x - a) / len).sin())
        .collect()
}

fn interior_of(grid: &Grid, values: &[f64]) -> Result<Vec<f64>> {
    let expected = grid.n_interior() + 2;
    if values.len() != expected {
        return Err(BeamError::DimensionMismatch { expected, found: values.len() });
    }
    Ok(values[1..expected - 1].to_vec())
}

/// Full statement of one beam problem.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamScenario {
    pub a: f64,
    pub b: f64,
    pub m_mass: f64,
    pub sigma: f64,
    pub damping: DampingLaw,
    pub restoring: RestoringLaw,
    pub forcing: Forcing,
    pub u0: SpatialProfile,
    pub u1: SpatialProfile,
    pub t_end: f64,
    pub dt: f64,
}

impl BeamScenario {
    pub fn length(&self) -> f64 {
        self.b - self.a
    }
}

impl Default for BeamScenario {
    /// Unit beam with linear-plus-quadratic damping, cubic springs and a
    /// first-mode load, released from rest at half amplitude.
    fn default() -> Self {
        BeamScenario {
            a: 0.0,
            b: 1.0,
            m_mass: 1.0,
            sigma: 1.0,
            damping: DampingLaw::LinearPlusQuadratic { c: 1.0, d: 1.0 },
            restoring: RestoringLaw::Cubic { kappa: 1.0 },
            forcing: Forcing::SineMode { amplitude: 1.0, mode: 1 },
            u0: SpatialProfile::SineMode { amplitude: 0.5, mode: 1 },
            u1: SpatialProfile::Zero,
            t_end: 50.0,
            dt: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Warn,
    Fail,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Warn => "WARN",
            CheckStatus::Fail => "FAIL",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub status: CheckStatus,
    pub detail: String,
}

/// Outcome of every hypothesis check on a scenario.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    fn push(&mut self, name: &'static str, status: CheckStatus, detail: impl Into<String>) {
        self.checks.push(Check { name, status, detail: detail.into() });
    }

    fn require(&mut self, name: &'static str, ok: bool, failure: impl Into<String>) {
        if ok {
            self.push(name, CheckStatus::Pass, "ok");
        } else {
            self.push(name, CheckStatus::Fail, failure);
        }
    }

    pub fn is_accepted(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Warn)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{:<4} {:<22} {}", c.status, c.name, c.detail)?;
        }
        Ok(())
    }
}

fn check_grid() -> impl Iterator<Item = f64> {
    let (lo, hi) = CHECK_RANGE;
    let step = (hi - lo) / (CHECK_POINTS - 1) as f64;
    (0..CHECK_POINTS).map(move |j| lo + j as f64 * step)
}

/// Checks the hypotheses of the convergence theorem on `s`. Convexity and
/// monotonicity are verified by sampling on [`CHECK_RANGE`], not proved.
pub fn validate_scenario(s: &BeamScenario) -> ValidationReport {
    let mut report = ValidationReport::default();

    report.require("domain", s.a < s.b, format!("need a < b, got a={} b={}", s.a, s.b));
    report.require("mass", s.m_mass > 0.0, format!("m must be positive, got {}", s.m_mass));
    report.require("rigidity", s.sigma > 0.0, format!("sigma must be positive, got {}", s.sigma));
    report.require("t_end", s.t_end > 0.0, format!("t_end must be positive, got {}", s.t_end));
    report.require("dt", s.dt > 0.0, format!("dt must be positive, got {}", s.dt));

    let params_ok = match s.damping {
        DampingLaw::LinearPlusQuadratic { c, d } => {
            report.require("damping parameters", c >= 0.0 && d >= 0.0, format!("need c >= 0 and d >= 0, got c={c} d={d}"));
            c >= 0.0 && d >= 0.0
        }
        DampingLaw::PowerLaw { delta, p } => {
            let ok = delta > 0.0 && p >= 2.0;
            report.require("damping parameters", ok, format!("need delta > 0 and p >= 2, got delta={delta} p={p}"));
            ok
        }
    };
    if params_ok && s.damping.is_undamped() {
        report.push("damping active", CheckStatus::Warn, "no damping: the flow conserves energy and will not settle");
    }

    let samples: Vec<f64> = check_grid().collect();
    let monotone = samples
        .windows(2)
        .all(|w| s.damping.eval(w[1]) >= s.damping.eval(w[0]));
    report.require("F1 monotone", monotone, "F1 decreases somewhere on the sample grid");
    let dissipative = samples.iter().all(|&x| x * s.damping.eval(x) >= 0.0);
    report.require("F1 dissipative", dissipative, "x*F1(x) < 0 somewhere on the sample grid");
    report.require("F1(0) = 0", s.damping.eval(0.0) == 0.0, "F1(0) is not zero");

    let worst_curvature = samples
        .iter()
        .map(|&x| s.restoring.stiffness(x))
        .fold(f64::INFINITY, f64::min);
    report.require(
        "convexity",
        worst_curvature >= 0.0,
        format!("f2'' reaches {worst_curvature:.3e} < 0 on the sample grid"),
    );
    if let RestoringLaw::SmoothedOneSided { eps, .. } = s.restoring {
        if eps <= 0.0 {
            report.push("restoring parameters", CheckStatus::Fail, format!("eps must be positive, got {eps}"));
        }
    }

    match s.restoring.declared_root() {
        Some(x0) if s.restoring.force(x0) == 0.0 => report.push("F2 root", CheckStatus::Pass, format!("F2({x0}) = 0")),
        Some(x0) => report.push("F2 root", CheckStatus::Fail, format!("F2({x0}) = {} != 0", s.restoring.force(x0))),
        None => report.push("F2 root", CheckStatus::Warn, "F2 vanishes only in the limit x -> -inf"),
    }

    report.require("forcing static", s.forcing.is_time_independent(), "forcing depends on time");

    for (name, profile) in [("u0 boundary", &s.u0), ("u1 boundary", &s.u1)] {
        match profile.endpoint_values() {
            Some((l, r)) => report.require(
                name,
                l.abs() <= 1e-12 && r.abs() <= 1e-12,
                format!("profile does not vanish at the endpoints ({l:.3e}, {r:.3e})"),
            ),
            None => report.push(name, CheckStatus::Fail, "empty sample profile"),
        }
    }

    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn damping_examples() {
        let lq = DampingLaw::LinearPlusQuadratic { c: 1.0, d: 2.0 };
        assert_eq!(lq.eval(-3.0), -21.0);
        assert_eq!(lq.eval(0.0), 0.0);
        let pl = DampingLaw::PowerLaw { delta: 1.0, p: 3.0 };
        assert_eq!(pl.eval(2.0), 4.0);
        assert_eq!(pl.eval(0.0), 0.0);
        assert_eq!(DampingLaw::PowerLaw { delta: 2.0, p: 2.0 }.eval(0.0), 0.0);
        assert_eq!(DampingLaw::PowerLaw { delta: 2.0, p: 2.0 }.derivative(0.0), 2.0);
        assert_eq!(lq.derivative(0.0), 1.0);
    }

    #[test]
    fn restoring_examples() {
        let lin = RestoringLaw::Linear { kappa: 2.0 };
        assert_eq!((lin.force(3.0), lin.potential(3.0), lin.stiffness(3.0)), (6.0, 9.0, 2.0));
        let cub = RestoringLaw::Cubic { kappa: 4.0 };
        assert_eq!((cub.force(1.0), cub.potential(1.0), cub.stiffness(1.0)), (4.0, 1.0, 12.0));
        assert_eq!((RestoringLaw::Zero.force(7.0), RestoringLaw::Zero.potential(7.0)), (0.0, 0.0));
    }

    #[test]
    fn smoothed_law_is_a_ramp() {
        let law = RestoringLaw::SmoothedOneSided { kappa: 3.0, eps: 0.01 };
        assert!((law.force(1.0) - 3.0).abs() < 1e-12);
        assert!(law.force(-1.0).abs() < 1e-30);
        assert!(law.potential(-1.0) >= 0.0);
        assert!((law.stiffness(0.0) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn discrete_gradient_matches_quotient() {
        let laws = [
            RestoringLaw::Linear { kappa: 1.7 },
            RestoringLaw::Cubic { kappa: 2.5 },
            RestoringLaw::SmoothedOneSided { kappa: 2.0, eps: 0.3 },
        ];
        for law in laws {
            for (x, y) in [(0.3, 0.9), (-1.2, 0.4), (2.0, 2.0), (0.1, 0.1 + 1e-9)] {
                let g = law.discrete_gradient(x, y);
                let expect = if x == y {
                    law.force(x)
                } else if (y - x).abs() < 1e-6 {
                    law.force(0.5 * (x + y))
                } else {
                    (law.potential(y) - law.potential(x)) / (y - x)
                };
                assert!((g - expect).abs() <= 1e-9 * (1.0 + expect.abs()), "{law}: {g} vs {expect}");
            }
        }
    }

    #[test]
    fn default_scenario_passes() {
        let report = validate_scenario(&BeamScenario::default());
        assert!(report.is_accepted(), "{report}");
        assert_eq!(report.warnings().count(), 0);
    }

    #[test]
    fn negative_mass_fails() {
        let s = BeamScenario { m_mass: -1.0, ..Default::default() };
        let report = validate_scenario(&s);
        assert!(!report.is_accepted());
        let check = report.get("mass").unwrap();
        assert_eq!(check.status, CheckStatus::Fail);
        assert!(check.detail.contains("m must be positive"));
    }

    #[test]
    fn negative_kappa_fails_convexity() {
        let s = BeamScenario { restoring: RestoringLaw::Linear { kappa: -0.5 }, ..Default::default() };
        let report = validate_scenario(&s);
        assert_eq!(report.get("convexity").unwrap().status, CheckStatus::Fail);
        assert_eq!(report.failures().count(), 1);
    }

    #[test]
    fn smoothed_law_warns_on_root() {
        let s = BeamScenario {
            restoring: RestoringLaw::SmoothedOneSided { kappa: 1.0, eps: 0.1 },
            ..Default::default()
        };
        let report = validate_scenario(&s);
        assert!(report.is_accepted());
        assert_eq!(report.get("F2 root").unwrap().status, CheckStatus::Warn);
    }

    #[test]
    fn boundary_incompatible_profile_fails() {
        let s = BeamScenario { u1: SpatialProfile::Samples(vec![0.1, 0.2, 0.3, 0.0]), ..Default::default() };
        let report = validate_scenario(&s);
        assert_eq!(report.get("u1 boundary").unwrap().status, CheckStatus::Fail);
    }

    #[test]
    fn undamped_scenario_warns() {
        let s = BeamScenario { damping: DampingLaw::LinearPlusQuadratic { c: 0.0, d: 0.0 }, ..Default::default() };
        let report = validate_scenario(&s);
        assert!(report.is_accepted());
        assert_eq!(report.get("damping active").unwrap().status, CheckStatus::Warn);
    }

    #[test]
    fn power_law_below_two_fails() {
        let s = BeamScenario { damping: DampingLaw::PowerLaw { delta: 1.0, p: 1.5 }, ..Default::default() };
        assert_eq!(validate_scenario(&s).get("damping parameters").unwrap().status, CheckStatus::Fail);
    }
}
