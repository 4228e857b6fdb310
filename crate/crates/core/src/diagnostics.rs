//! Lyapunov bookkeeping along a computed flow.
//!
//! The total energy
//! `E = m/2 |v|^2 + sigma/2 |u|_{H2*}^2 + V(u) - (f, u)`
//! is non-increasing for time-independent forcing and drops by exactly the
//! damping work `int (F1(v), v) dt`. The checks below measure how closely a
//! trajectory honours those statements and whether it settles onto the
//! minimizer of the static potential energy.

use crate::discretization::Discretization;
use crate::dynamics::{State, Trajectory};
use crate::error::{BeamError, Result};
use crate::model::BeamScenario;
use crate::stationary::{sigma_T, StationarySolution};

/// Energy decomposition at one instant.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EnergyLedger {
    pub t: f64,
    pub kinetic: f64,
    pub elastic: f64,
    pub potential: f64,
    pub forcing: f64,
    pub total: f64,
    /// Damping work accumulated since `t = 0`.
    pub dissipated_cumulative: f64,
    /// Damping work of the step that ended at `t` (zero for the initial ledger).
    pub dissipated_step: f64,
    /// `|u|_{H2*}`
    pub h2star_norm_u: f64,
    /// `|v|_{L2}`
    pub l2_norm_v: f64,
}

/// Caches the projected forcing so ledgers can be formed at every step.
pub struct EnergyEvaluator<'a> {
    scenario: &'a BeamScenario,
    disc: &'a Discretization,
    forcing: Vec<f64>,
}

impl<'a> EnergyEvaluator<'a> {
    pub fn new(scenario: &'a BeamScenario, disc: &'a Discretization) -> Result<Self> {
        let forcing = disc.from_nodal(&scenario.forcing.sample(disc.grid())?)?;
        Ok(EnergyEvaluator { scenario, disc, forcing })
    }

    /// Forcing in state coordinates.
    pub fn forcing(&self) -> &[f64] {
        &self.forcing
    }

    pub fn ledger(&self, state: &State, dissipated: f64) -> EnergyLedger {
        let s = self.scenario;
        let d = self.disc;
        let v_sq = d.l2_inner_unchecked(&state.v, &state.v);
        let h2 = d.h2star_norm_sq_unchecked(&state.u);
        let kinetic = 0.5 * s.m_mass * v_sq;
        let elastic = 0.5 * s.sigma * h2;
        let potential = d.quadrature().potential_unchecked(&d.to_nodal_unchecked(&state.u), &s.restoring);
        let forcing = -d.l2_inner_unchecked(&self.forcing, &state.u);
        EnergyLedger {
            t: state.t,
            kinetic,
            elastic,
            potential,
            forcing,
            total: kinetic + elastic + potential + forcing,
            dissipated_cumulative: dissipated,
            dissipated_step: 0.0,
            h2star_norm_u: h2.sqrt(),
            l2_norm_v: v_sq.sqrt(),
        }
    }

    pub fn total(&self, state: &State) -> f64 {
        self.ledger(state, 0.0).total
    }
}

/// Energy ledger of a single state (no dissipation history).
pub fn energy_of(state: &State, scenario: &BeamScenario, disc: &Discretization) -> Result<EnergyLedger> {
    disc.check_dim(state.u.len())?;
    disc.check_dim(state.v.len())?;
    Ok(EnergyEvaluator::new(scenario, disc)?.ledger(state, 0.0))
}

/// Per-step tolerance on energy increase: ten Newton tolerances.
pub fn monotonicity_tolerance(newton_tol: f64) -> f64 {
    10.0 * newton_tol
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MonotoneCheck {
    pub violations: usize,
    /// Largest single-step increase (0 when the series never rises).
    pub worst: f64,
}

/// Counts steps where the energy rises by more than `tol`.
pub fn count_energy_increases(ledgers: &[EnergyLedger], tol: f64) -> MonotoneCheck {
    let mut out = MonotoneCheck::default();
    for w in ledgers.windows(2) {
        let rise = w[1].total - w[0].total;
        out.worst = out.worst.max(rise);
        if rise > tol {
            out.violations += 1;
        }
    }
    out
}

pub fn check_energy_monotone(traj: &Trajectory) -> MonotoneCheck {
    count_energy_increases(&traj.ledgers, monotonicity_tolerance(traj.settings.newton_tol))
}

/// `max_k |E(t_k) - E(0) + D(t_k)|` where `D` is the cumulative damping work.
pub fn check_energy_identity(traj: &Trajectory) -> f64 {
    let Some(first) = traj.ledgers.first() else { return 0.0 };
    traj.ledgers
        .iter()
        .map(|l| (l.total - first.total + l.dissipated_cumulative).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Bounds {
    /// `sup_t |u(t)|^2_{H2*}`
    pub sup_h2star: f64,
    /// Same supremum restricted to the second half of the run.
    pub sup_h2star_late: f64,
    /// `sup_t D(t)`; `D` is non-decreasing, so this is `D(t_end)`.
    pub sup_dissipated: f64,
    /// `D(t_end) - D(t_end / 2)`
    pub dissipated_tail: f64,
}

pub fn check_bounds(traj: &Trajectory) -> Bounds {
    let t_half = 0.5 * traj.t_end();
    let mut b = Bounds::default();
    let mut d_half = None;
    for l in &traj.ledgers {
        let h2 = l.h2star_norm_u * l.h2star_norm_u;
        b.sup_h2star = b.sup_h2star.max(h2);
        b.sup_dissipated = b.sup_dissipated.max(l.dissipated_cumulative);
        if l.t >= t_half {
            b.sup_h2star_late = b.sup_h2star_late.max(h2);
            d_half.get_or_insert(l.dissipated_cumulative);
        }
    }
    let d_half = d_half.unwrap_or(0.0);
    let d_end = traj.ledgers.last().map_or(0.0, |l| l.dissipated_cumulative);
    b.dissipated_tail = d_end - d_half;
    b
}

/// Damping work over `[t, t + window]` for every recorded start time that
/// leaves a full window, as `(t, work)` pairs. Sums the per-step work
/// directly; differences of the cumulative total would lose late, tiny
/// increments to roundoff.
pub fn windowed_dissipation(traj: &Trajectory, window: f64) -> Result<Vec<(f64, f64)>> {
    if !(window > 0.0) {
        return Err(BeamError::InvalidArgument(format!("window must be positive, got {window}")));
    }
    let l = &traj.ledgers;
    let span = match (l.first(), l.last()) {
        (Some(a), Some(b)) => b.t - a.t,
        _ => 0.0,
    };
    let slack = 1e-9 * window;
    if window > span + slack {
        return Err(BeamError::InvalidArgument(format!(
            "window {window} exceeds trajectory span {span}"
        )));
    }
    let mut out = Vec::new();
    let mut j = 0;
    for (k, start) in l.iter().enumerate() {
        let target = start.t + window - slack;
        j = j.max(k);
        while j < l.len() && l[j].t < target {
            j += 1;
        }
        if j == l.len() {
            break;
        }
        let work: f64 = l[k + 1..=j].iter().map(|e| e.dissipated_step).sum();
        out.push((start.t, work));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub times: Vec<f64>,
    /// `|u(t) - u_hat|_{H2*}` at each snapshot.
    pub h2star_gap: Vec<f64>,
    /// `|v(t)|_{L2}` at each snapshot.
    pub v_l2: Vec<f64>,
    pub sigma_t_series: Vec<f64>,
    /// `Sigma_T(u_hat)`, the floor of `sigma_t_series`.
    pub sigma_t_min: f64,
    /// First snapshot time after which both gaps stay below tolerance.
    pub settled_at: Option<f64>,
    pub monotonicity: MonotoneCheck,
    /// Snapshots whose `Sigma_T` dips below the minimum by more than roundoff.
    pub floor_violations: usize,
}

impl ConvergenceReport {
    /// `Sigma_T(u(t_end)) - Sigma_T(u_hat)`.
    pub fn final_sigma_t_excess(&self) -> f64 {
        self.sigma_t_series.last().map_or(f64::NAN, |s| s - self.sigma_t_min)
    }

    pub fn final_gap(&self) -> f64 {
        self.h2star_gap.last().copied().unwrap_or(f64::NAN)
    }

    pub fn final_v(&self) -> f64 {
        self.v_l2.last().copied().unwrap_or(f64::NAN)
    }
}

/// Distance of the flow from the stationary solution. `settled_at` requires
/// the tolerances to hold at every later snapshot, not only at a crossing.
pub fn convergence_report(
    traj: &Trajectory,
    disc: &Discretization,
    stationary: &StationarySolution,
    gap_tol: f64,
    v_tol: f64,
) -> Result<ConvergenceReport> {
    disc.check_dim(stationary.u_hat.len())?;
    let scenario = &traj.scenario;
    let n = traj.snapshots.len();
    let mut report = ConvergenceReport {
        times: Vec::with_capacity(n),
        h2star_gap: Vec::with_capacity(n),
        v_l2: Vec::with_capacity(n),
        sigma_t_series: Vec::with_capacity(n),
        sigma_t_min: stationary.sigma_t_value,
        settled_at: None,
        monotonicity: check_energy_monotone(traj),
        floor_violations: 0,
    };
    for st in &traj.snapshots {
        disc.check_dim(st.u.len())?;
        let diff: Vec<f64> = st.u.iter().zip(&stationary.u_hat).map(|(a, b)| a - b).collect();
        let sig = sigma_T(&st.u, scenario, disc)?;
        report.times.push(st.t);
        report.h2star_gap.push(disc.h2star_norm_sq_unchecked(&diff).sqrt());
        report.v_l2.push(disc.l2_inner_unchecked(&st.v, &st.v).sqrt());
        if sig < stationary.sigma_t_value - 1e-12 * (1.0 + stationary.sigma_t_value.abs()) {
            report.floor_violations += 1;
        }
        report.sigma_t_series.push(sig);
    }
    let mut settled = None;
    for k in (0..n).rev() {
        if report.h2star_gap[k] <= gap_tol && report.v_l2[k] <= v_tol {
            settled = Some(report.times[k]);
        } else {
            break;
        }
    }
    report.settled_at = settled;
    Ok(report)
}
