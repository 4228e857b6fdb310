//! Time integration of `m v' + F1(v) + sigma A u + F2(u) = f`, `u' = v`.
//!
//! Each step is the implicit midpoint rule with the restoring force replaced
//! by the coordinate-wise discrete gradient of `V`:
//!
//! ```text
//! u+ = u + dt (v + v+)/2
//! m (v+ - v)/dt + F1(v_mid) + sigma A u_mid + G(u, u+) = f
//! ```
//!
//! Pairing the momentum equation with `u+ - u = dt v_mid` telescopes into
//! `E(u+, v+) - E(u, v) = -dt (F1(v_mid), v_mid)` up to the Newton residual,
//! which is the discrete form of the energy identity.

use log::debug;

use crate::diagnostics::{EnergyEvaluator, EnergyLedger};
use crate::discretization::{Discretization, Scheme};
use crate::error::{BeamError, Result};
use crate::model::BeamScenario;
use crate::settings::SolverSettings;

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl State {
    pub fn zeros(n: usize) -> Self {
        State { t: 0.0, u: vec![0.0; n], v: vec![0.0; n] }
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v).all(|x| x.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub newton_iters: usize,
    pub residual_norm: f64,
    pub energy_before: f64,
    pub energy_after: f64,
    pub dissipation_increment: f64,
    /// Set when the step was split into two halves after a Newton failure.
    pub halved: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NewtonStats {
    pub steps: usize,
    pub total_iters: usize,
    pub max_iters: usize,
    pub max_residual: f64,
    pub halvings: usize,
}

impl NewtonStats {
    fn record(&mut self, report: &StepReport) {
        self.steps += 1;
        self.total_iters += report.newton_iters;
        self.max_iters = self.max_iters.max(report.newton_iters);
        self.max_residual = self.max_residual.max(report.residual_norm);
        self.halvings += report.halved as usize;
    }

    pub fn mean_iters(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.total_iters as f64 / self.steps as f64
        }
    }
}

/// Energies at every step, states at every output stride.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub scenario: BeamScenario,
    pub settings: SolverSettings,
    pub ledgers: Vec<EnergyLedger>,
    pub snapshots: Vec<State>,
    pub stats: NewtonStats,
}

impl Trajectory {
    pub fn final_state(&self) -> &State {
        self.snapshots.last().expect("trajectory always holds the initial state")
    }

    pub fn t_end(&self) -> f64 {
        self.ledgers.last().map_or(0.0, |l| l.t)
    }
}

/// One-step map bound to a scenario and discretization.
pub struct Integrator<'a> {
    scenario: &'a BeamScenario,
    disc: &'a Discretization,
    settings: SolverSettings,
    energy: EnergyEvaluator<'a>,
}

struct Converged {
    v_next: Vec<f64>,
    u_next: Vec<f64>,
    iters: usize,
    residual: f64,
    dissipation: f64,
}

impl<'a> Integrator<'a> {
    pub fn new(scenario: &'a BeamScenario, disc: &'a Discretization, settings: SolverSettings) -> Result<Self> {
        let energy = EnergyEvaluator::new(scenario, disc)?;
        Ok(Integrator { scenario, disc, settings, energy })
    }

    pub fn energy(&self) -> &EnergyEvaluator<'a> {
        &self.energy
    }

    /// Initial state from the scenario's `u0`, `u1`.
    pub fn initial_state(&self) -> Result<State> {
        let grid = self.disc.grid();
        let u = self.disc.from_nodal(&self.scenario.u0.sample(grid)?)?;
        let v = self.disc.from_nodal(&self.scenario.u1.sample(grid)?)?;
        Ok(State { t: 0.0, u, v })
    }

    /// A single implicit step of size `dt`, no retry.
    pub fn step(&self, state: &State, dt: f64) -> Result<(State, StepReport)> {
        if !(dt > 0.0) {
            return Err(BeamError::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        self.disc.check_dim(state.u.len())?;
        self.disc.check_dim(state.v.len())?;
        let energy_before = self.energy.total(state);
        let c = self.solve_step(state, dt)?;
        let next = State { t: state.t + dt, u: c.u_next, v: c.v_next };
        let energy_after = self.energy.total(&next);
        let report = StepReport {
            newton_iters: c.iters,
            residual_norm: c.residual,
            energy_before,
            energy_after,
            dissipation_increment: c.dissipation,
            halved: false,
        };
        Ok((next, report))
    }

    /// A step of size `dt`; on Newton failure the interval is retried once
    /// as two half steps.
    pub fn advance(&self, state: &State, dt: f64) -> Result<(State, StepReport)> {
        match self.step(state, dt) {
            Err(BeamError::NewtonDivergence { .. }) => {
                debug!("newton failed at t={}, retrying with dt/2", state.t);
                let (mid, r1) = self.step(state, 0.5 * dt)?;
                let (mut end, r2) = self.step(&mid, 0.5 * dt)?;
                end.t = state.t + dt;
                Ok((
                    end,
                    StepReport {
                        newton_iters: r1.newton_iters + r2.newton_iters,
                        residual_norm: r1.residual_norm.max(r2.residual_norm),
                        energy_before: r1.energy_before,
                        energy_after: r2.energy_after,
                        dissipation_increment: r1.dissipation_increment + r2.dissipation_increment,
                        halved: true,
                    },
                ))
            }
            other => other,
        }
    }

    fn solve_step(&self, state: &State, dt: f64) -> Result<Converged> {
        let disc = self.disc;
        let s = self.scenario;
        let n = disc.dim();
        let (m, sigma) = (s.m_mass, s.sigma);
        let h = disc.quadrature().weight();
        let forcing = self.energy.forcing();

        let au = disc.stiffness_unchecked(&state.u);
        let u_nodal = disc.to_nodal_unchecked(&state.u);
        let fd_bands = match disc.scheme() {
            Scheme::FiniteDifference => disc.operator().bands(),
            Scheme::SpectralSine => None,
        };

        let mut v_next = state.v.clone();
        let mut residual = f64::INFINITY;
        for iter in 0..=self.settings.newton_max_iter {
            let v_mid: Vec<f64> = state.v.iter().zip(&v_next).map(|(a, b)| 0.5 * (a + b)).collect();
            let vm_nodal = disc.to_nodal_unchecked(&v_mid);
            let up_nodal: Vec<f64> = u_nodal.iter().zip(&vm_nodal).map(|(u, w)| u + dt * w).collect();

            let damping: Vec<f64> = vm_nodal.iter().map(|&x| s.damping.eval(x)).collect();
            let restoring: Vec<f64> = u_nodal
                .iter()
                .zip(&up_nodal)
                .map(|(&a, &b)| s.restoring.discrete_gradient(a, b))
                .collect();
            let load_nodal: Vec<f64> = damping.iter().zip(&restoring).map(|(a, b)| a + b).collect();
            let load = disc.from_nodal_unchecked(&load_nodal);
            let av_mid = disc.stiffness_unchecked(&v_mid);

            // Residual in velocity units: (v+ - v) + dt/m * (forces).
            let rho: Vec<f64> = (0..n)
                .map(|i| {
                    let stiff = sigma * (au[i] + 0.5 * dt * av_mid[i]);
                    (v_next[i] - state.v[i]) + dt / m * (load[i] + stiff - forcing[i])
                })
                .collect();
            residual = rho.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
            if !residual.is_finite() {
                break;
            }
            if residual <= self.settings.newton_tol {
                let u_next: Vec<f64> = state.u.iter().zip(&v_mid).map(|(u, w)| u + dt * w).collect();
                let dissipation = dt * h * damping.iter().zip(&vm_nodal).map(|(f, w)| f * w).sum::<f64>();
                return Ok(Converged { v_next, u_next, iters: iter, residual, dissipation });
            }
            if iter == self.settings.newton_max_iter {
                break;
            }

            // J = m/dt I + 1/2 P diag(F1'(v_mid)) + dt/4 (sigma A + P diag(F2'(u_mid)))
            let nodal_diag: Vec<f64> = vm_nodal
                .iter()
                .zip(u_nodal.iter().zip(&up_nodal))
                .map(|(&w, (&a, &b))| 0.5 * s.damping.derivative(w) + 0.25 * dt * s.restoring.stiffness(0.5 * (a + b)))
                .collect();
            let rhs: Vec<f64> = rho.iter().map(|r| -m / dt * r).collect();
            let delta = match &fd_bands {
                Some(bands) => {
                    let mut jac = bands.clone();
                    let scale = 0.25 * dt * sigma;
                    jac.off1.iter_mut().for_each(|x| *x *= scale);
                    jac.off2.iter_mut().for_each(|x| *x *= scale);
                    for (d, w) in jac.diag.iter_mut().zip(&nodal_diag) {
                        *d = *d * scale + m / dt + w;
                    }
                    jac.cholesky()?.solve(&rhs)
                }
                None => {
                    // Diagonal of the modal Newton matrix; the off-diagonal
                    // coupling from the nodal terms is left to the iteration.
                    let transform = disc.transform().expect("spectral scheme has a transform");
                    let proj = transform.projected_diagonal(&nodal_diag);
                    let op = disc.operator();
                    (0..n)
                        .map(|k| {
                            let d = m / dt + 0.25 * dt * sigma * op.eigenvalue(k + 1) + proj[k];
                            if !(d > 0.0) {
                                return Err(BeamError::SingularJacobian);
                            }
                            Ok(rhs[k] / d)
                        })
                        .collect::<Result<Vec<f64>>>()?
                }
            };
            v_next.iter_mut().zip(&delta).for_each(|(v, d)| *v += d);
        }
        Err(BeamError::NewtonDivergence { iterations: self.settings.newton_max_iter, residual })
    }
}

/// Integrates from `t = 0` to `scenario.t_end`. The last step is shortened
/// if `t_end` is not a multiple of `dt`.
pub fn run(scenario: &BeamScenario, disc: &Discretization, settings: SolverSettings) -> Result<Trajectory> {
    let integrator = Integrator::new(scenario, disc, settings)?;
    let mut state = integrator.initial_state()?;
    let stride = settings.output_stride.max(1);
    let t_end = scenario.t_end.max(0.0);
    let n_steps = if t_end > 0.0 { ((t_end / scenario.dt) - 1e-9).ceil().max(1.0) as usize } else { 0 };

    let mut dissipated = 0.0;
    let mut ledgers = Vec::with_capacity(n_steps + 1);
    ledgers.push(integrator.energy().ledger(&state, dissipated));
    let mut snapshots = vec![state.clone()];
    let mut stats = NewtonStats::default();

    for k in 0..n_steps {
        let t_next = ((k + 1) as f64 * scenario.dt).min(t_end);
        let dt = t_next - state.t;
        let (mut next, report) = integrator
            .advance(&state, dt)
            .map_err(|e| BeamError::StepFailed { t: state.t, source: Box::new(e) })?;
        next.t = t_next;
        stats.record(&report);
        dissipated += report.dissipation_increment;
        let mut ledger = integrator.energy().ledger(&next, dissipated);
        ledger.dissipated_step = report.dissipation_increment;
        ledgers.push(ledger);
        state = next;
        if (k + 1) % stride == 0 || k + 1 == n_steps {
            snapshots.push(state.clone());
        }
    }

    Ok(Trajectory { scenario: scenario.clone(), settings, ledgers, snapshots, stats })
}

/// Discrete weak-form residual of the step `prev -> next` against the test
/// vector `w`: the midpoint momentum balance paired with `w`, scaled by
/// `dt/m` and divided by `||w||_L1`. A converged step satisfies
/// `weak_residual <= newton_tol` for finite differences.
pub fn weak_residual(
    prev: &State,
    next: &State,
    scenario: &BeamScenario,
    disc: &Discretization,
    test: &[f64],
) -> Result<f64> {
    for len in [prev.u.len(), prev.v.len(), next.u.len(), next.v.len(), test.len()] {
        disc.check_dim(len)?;
    }
    let dt = next.t - prev.t;
    if !(dt > 0.0) {
        return Err(BeamError::InvalidArgument("states must be ordered in time".into()));
    }
    let forcing = disc.from_nodal(&scenario.forcing.sample(disc.grid())?)?;
    let n = disc.dim();
    let v_mid: Vec<f64> = (0..n).map(|i| 0.5 * (prev.v[i] + next.v[i])).collect();
    let u_mid: Vec<f64> = (0..n).map(|i| 0.5 * (prev.u[i] + next.u[i])).collect();
    let vm_nodal = disc.to_nodal_unchecked(&v_mid);
    let (u0, u1) = (disc.to_nodal_unchecked(&prev.u), disc.to_nodal_unchecked(&next.u));
    let load_nodal: Vec<f64> = (0..n)
        .map(|i| scenario.damping.eval(vm_nodal[i]) + scenario.restoring.discrete_gradient(u0[i], u1[i]))
        .collect();
    let load = disc.from_nodal_unchecked(&load_nodal);
    let a_mid = disc.stiffness_unchecked(&u_mid);
    let momentum: Vec<f64> = (0..n)
        .map(|i| {
            scenario.m_mass * (next.v[i] - prev.v[i]) / dt + load[i] + scenario.sigma * a_mid[i] - forcing[i]
        })
        .collect();
    let pairing = disc.l2_inner_unchecked(&momentum, test);
    let test_l1 = disc.quadrature().lp_norm_pow(&disc.to_nodal_unchecked(test), 1.0)?;
    if test_l1 == 0.0 {
        return Ok(0.0);
    }
    Ok(dt / scenario.m_mass * pairing.abs() / test_l1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::Grid;
    use crate::model::{DampingLaw, Forcing, RestoringLaw, SpatialProfile};

    fn zero_scenario() -> BeamScenario {
        BeamScenario {
            restoring: RestoringLaw::Cubic { kappa: 1.0 },
            forcing: Forcing::Zero,
            u0: SpatialProfile::Zero,
            u1: SpatialProfile::Zero,
            t_end: 0.05,
            ..Default::default()
        }
    }

    fn fd(n: usize) -> Discretization {
        Discretization::new(Grid::new(0.0, 1.0, n).unwrap(), Scheme::FiniteDifference).unwrap()
    }

    #[test]
    fn equilibrium_stays_zero() {
        let s = zero_scenario();
        let traj = run(&s, &fd(20), SolverSettings::default()).unwrap();
        assert_eq!(traj.ledgers.len(), 51);
        for st in &traj.snapshots {
            assert!(st.u.iter().chain(&st.v).all(|&x| x == 0.0));
        }
        assert!(traj.ledgers.iter().all(|l| l.total == 0.0 && l.dissipated_cumulative == 0.0));
    }

    #[test]
    fn zero_horizon_keeps_initial_state() {
        let s = BeamScenario { t_end: 0.0, ..Default::default() };
        let disc = fd(10);
        let traj = run(&s, &disc, SolverSettings::default()).unwrap();
        assert_eq!(traj.snapshots.len(), 1);
        assert_eq!(traj.ledgers.len(), 1);
        assert_eq!(traj.stats.steps, 0);
    }

    #[test]
    fn last_step_is_shortened() {
        let s = BeamScenario { t_end: 0.0105, dt: 1e-3, ..Default::default() };
        let traj = run(&s, &fd(10), SolverSettings::default()).unwrap();
        assert_eq!(traj.ledgers.len(), 12);
        assert_eq!(traj.t_end(), 0.0105);
        assert_eq!(traj.final_state().t, 0.0105);
    }

    #[test]
    fn converged_step_has_small_weak_residual() {
        let s = BeamScenario::default();
        let disc = fd(40);
        let integ = Integrator::new(&s, &disc, SolverSettings::default()).unwrap();
        let x0 = integ.initial_state().unwrap();
        let (x1, report) = integ.step(&x0, s.dt).unwrap();
        assert!(report.residual_norm <= 1e-10);
        for k in 0..5 {
            let w: Vec<f64> = (0..40).map(|i| ((i * (k + 2)) as f64 * 0.3).sin()).collect();
            let r = weak_residual(&x0, &x1, &s, &disc, &w).unwrap();
            assert!(r <= 1e-10, "{r}");
        }
    }

    #[test]
    fn weak_residual_of_zero_pair_is_zero() {
        let s = zero_scenario();
        let disc = fd(12);
        let a = State::zeros(12);
        let b = State { t: 1e-3, ..State::zeros(12) };
        assert_eq!(weak_residual(&a, &b, &s, &disc, &[1.0; 12]).unwrap(), 0.0);
    }

    #[test]
    fn step_rejects_bad_input() {
        let s = BeamScenario::default();
        let disc = fd(10);
        let integ = Integrator::new(&s, &disc, SolverSettings::default()).unwrap();
        let x0 = integ.initial_state().unwrap();
        assert!(integ.step(&x0, 0.0).is_err());
        assert!(integ.step(&State::zeros(9), 1e-3).is_err());
    }

    #[test]
    fn tiny_iteration_budget_fails_then_propagates_time() {
        let s = BeamScenario { damping: DampingLaw::LinearPlusQuadratic { c: 1.0, d: 50.0 }, t_end: 0.01, ..Default::default() };
        let disc = fd(10);
        let settings = SolverSettings { newton_max_iter: 0, ..Default::default() };
        match run(&s, &disc, settings) {
            Err(BeamError::StepFailed { t, source }) => {
                assert_eq!(t, 0.0);
                assert!(matches!(*source, BeamError::NewtonDivergence { .. }));
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }
}
