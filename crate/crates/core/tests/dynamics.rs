mod common;

use beam_core::diagnostics::{check_energy_identity, check_energy_monotone};
use beam_core::dynamics::{run, weak_residual, Integrator, State};
use beam_core::model::{BeamScenario, DampingLaw, Forcing, RestoringLaw, SpatialProfile};
use beam_core::{BeamError, SolverSettings};
use common::{canonical_rk4, damped_single_mode, fd, max_abs_diff, spectral, stencil_apply, Oscillator};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn settings() -> SolverSettings {
    SolverSettings::default()
}

#[test]
fn equilibrium_stays_at_rest() {
    let s = BeamScenario {
        forcing: Forcing::Zero,
        u0: SpatialProfile::Zero,
        t_end: 0.2,
        ..BeamScenario::default()
    };
    for d in [fd(20), spectral(20)] {
        let traj = run(&s, &d, settings()).unwrap();
        assert!(traj.snapshots.iter().all(|st| st.u.iter().chain(&st.v).all(|&x| x == 0.0)));
        assert!(traj.ledgers.iter().all(|l| l.total == 0.0 && l.kinetic == 0.0 && l.dissipated_cumulative == 0.0));
    }
}

#[test]
fn zero_duration_keeps_initial_state() {
    let s = BeamScenario { t_end: 0.0, ..BeamScenario::default() };
    let traj = run(&s, &fd(10), settings()).unwrap();
    assert_eq!(traj.ledgers.len(), 1);
    assert_eq!(traj.snapshots.len(), 1);
    assert_eq!(traj.final_state().t, 0.0);
}

#[test]
fn final_step_lands_on_t_end() {
    let s = BeamScenario { t_end: 0.0105, dt: 1e-3, ..BeamScenario::default() };
    let traj = run(&s, &fd(10), settings()).unwrap();
    assert_eq!(traj.ledgers.len(), 12);
    assert_eq!(traj.final_state().t, 0.0105);
}

#[test]
fn single_mode_matches_closed_form() {
    let osc = Oscillator::single_mode();
    let d = spectral(8);
    let traj = run(&damped_single_mode(), &d, settings()).unwrap();
    let st = traj.final_state();
    assert!((st.u[0] - osc.q(1.0)).abs() < 5e-5);
    assert!((st.v[0] - osc.qdot(1.0)).abs() < 5e-3);
    assert!(st.u[1..].iter().all(|c| c.abs() < 1e-14));
    // Energy along the run tracks the oscillator energy at second order in dt.
    let worst = traj.ledgers.iter().map(|l| (l.total - osc.beam_energy(l.t)).abs()).fold(0.0f64, f64::max);
    assert!(worst < 1e-3 * osc.beam_energy(0.0), "energy error {worst}");

    let half = run(&BeamScenario { dt: 5e-4, ..damped_single_mode() }, &d, settings()).unwrap();
    let worst_half = half.ledgers.iter().map(|l| (l.total - osc.beam_energy(l.t)).abs()).fold(0.0f64, f64::max);
    let ratio = worst / worst_half;
    assert!((3.2..=4.8).contains(&ratio), "energy error ratio {ratio}");
}

#[test]
fn fd_single_mode_matches_closed_form_with_fd_frequency() {
    // On the grid the first mode oscillates at the discrete eigenvalue.
    let n = 40;
    let d = fd(n);
    let osc = Oscillator { k: d.operator().eigenvalue(1), ..Oscillator::single_mode() };
    let traj = run(&damped_single_mode(), &d, settings()).unwrap();
    let expected: Vec<f64> = common::sine(n, 1).iter().map(|s| osc.q(1.0) * s).collect();
    assert!(max_abs_diff(&traj.final_state().u, &expected) < 5e-5);
}

#[test]
fn nonlinear_run_is_second_order_against_rk4() {
    let n = 40;
    let d = fd(n);
    let reference = canonical_rk4(n, 1e-5, 0.5);
    let errs: Vec<f64> = [2e-3, 1e-3]
        .iter()
        .map(|&dt| {
            let traj = run(&BeamScenario { t_end: 0.5, dt, ..BeamScenario::default() }, &d, settings()).unwrap();
            let diff: Vec<f64> = traj.final_state().u.iter().zip(&reference).map(|(a, b)| a - b).collect();
            d.l2_norm(&diff).unwrap()
        })
        .collect();
    assert!(errs[1] < 1e-5, "error {}", errs[1]);
    let ratio = errs[0] / errs[1];
    assert!((3.2..=4.8).contains(&ratio), "ratio {ratio}");
}

#[test]
fn runs_are_deterministic() {
    let s = BeamScenario { t_end: 0.3, ..BeamScenario::default() };
    for d in [fd(30), spectral(30)] {
        let a = run(&s, &d, settings()).unwrap();
        let b = run(&s, &d, settings()).unwrap();
        assert_eq!(a.ledgers, b.ledgers);
        assert_eq!(a.snapshots, b.snapshots);
    }
}

#[test]
fn converged_steps_have_small_weak_residual() {
    let s = BeamScenario::default();
    let d = fd(50);
    let integ = Integrator::new(&s, &d, settings()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut state = integ.initial_state().unwrap();
    for _ in 0..20 {
        let (next, report) = integ.step(&state, s.dt).unwrap();
        assert!(report.residual_norm <= settings().newton_tol);
        for _ in 0..5 {
            let w: Vec<f64> = (0..d.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!(weak_residual(&state, &next, &s, &d, &w).unwrap() <= settings().newton_tol);
        }
        state = next;
    }
}

#[test]
fn weak_residual_of_zero_state_is_zero() {
    let s = BeamScenario { forcing: Forcing::Zero, ..BeamScenario::default() };
    let d = fd(12);
    let prev = State::zeros(12);
    let next = State { t: 1e-3, ..State::zeros(12) };
    assert_eq!(weak_residual(&prev, &next, &s, &d, &vec![1.0; 12]).unwrap(), 0.0);
}

#[test]
fn weak_residual_of_perturbed_state_matches_direct_evaluation() {
    let s = BeamScenario::default();
    let n = 24;
    let d = fd(n);
    let h = d.grid().h();
    let integ = Integrator::new(&s, &d, settings()).unwrap();
    let prev = integ.initial_state().unwrap();
    let (mut next, _) = integ.step(&prev, s.dt).unwrap();
    next.u.iter_mut().for_each(|x| *x *= 2.0);
    let w: Vec<f64> = common::nodes(n).iter().map(|x| x * (1.0 - x)).collect();

    let f = common::sine(n, 1);
    let dt = next.t - prev.t;
    let u_mid: Vec<f64> = prev.u.iter().zip(&next.u).map(|(a, b)| 0.5 * (a + b)).collect();
    let a_mid = stencil_apply(&u_mid, h);
    let mut pairing = 0.0;
    for i in 0..n {
        let v_mid = 0.5 * (prev.v[i] + next.v[i]);
        let (x, y) = (prev.u[i], next.u[i]);
        let dg = (y.powi(4) - x.powi(4)) / (4.0 * (y - x));
        let momentum = (next.v[i] - prev.v[i]) / dt + v_mid + v_mid.abs() * v_mid + dg + a_mid[i] - f[i];
        pairing += h * momentum * w[i];
    }
    let l1: f64 = h * w.iter().map(|x| x.abs()).sum::<f64>();
    let expected = dt * pairing.abs() / l1;
    let got = weak_residual(&prev, &next, &s, &d, &w).unwrap();
    assert!(got > 1e-6);
    assert!((got - expected).abs() <= 1e-9 * expected, "{got} vs {expected}");
}

#[test]
fn step_rejects_nonpositive_dt() {
    let s = BeamScenario::default();
    let d = fd(10);
    let integ = Integrator::new(&s, &d, settings()).unwrap();
    let st = integ.initial_state().unwrap();
    assert!(matches!(integ.step(&st, 0.0), Err(BeamError::InvalidArgument(_))));
}

#[test]
fn spectral_run_dissipates_energy() {
    let s = BeamScenario { t_end: 2.0, ..BeamScenario::default() };
    let traj = run(&s, &spectral(64), settings()).unwrap();
    let check = check_energy_monotone(&traj);
    assert_eq!(check.violations, 0);
    assert!(check_energy_identity(&traj) <= 1e-9 * 2000.0);
}

fn small_scenario() -> impl Strategy<Value = (BeamScenario, usize, bool)> {
    (
        0.0..2.0f64,
        0.0..2.0f64,
        prop_oneof![
            (0.0..5.0f64).prop_map(|kappa| RestoringLaw::Linear { kappa }),
            (0.0..5.0f64).prop_map(|kappa| RestoringLaw::Cubic { kappa }),
            (0.1..5.0f64, 0.05..0.5f64).prop_map(|(kappa, eps)| RestoringLaw::SmoothedOneSided { kappa, eps }),
        ],
        -1.0..1.0f64,
        -2.0..2.0f64,
        1u32..4,
        5usize..24,
        any::<bool>(),
    )
        .prop_map(|(c, d, restoring, amp, load, mode, n, spectral_scheme)| {
            let s = BeamScenario {
                damping: DampingLaw::LinearPlusQuadratic { c, d },
                restoring,
                forcing: Forcing::SineMode { amplitude: load, mode: 1 },
                u0: SpatialProfile::SineMode { amplitude: amp, mode },
                u1: SpatialProfile::SineMode { amplitude: -amp, mode: 1 },
                t_end: 0.05,
                dt: 1e-3,
                ..BeamScenario::default()
            };
            (s, n, spectral_scheme)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn energy_never_increases((s, n, spectral_scheme) in small_scenario()) {
        let d = if spectral_scheme { spectral(n) } else { fd(n) };
        let traj = run(&s, &d, settings()).unwrap();
        let check = check_energy_monotone(&traj);
        prop_assert_eq!(check.violations, 0, "worst rise {}", check.worst);
        let steps = (traj.ledgers.len() - 1) as f64;
        prop_assert!(check_energy_identity(&traj) <= 1e-9 * steps);
        let d_cum: Vec<f64> = traj.ledgers.iter().map(|l| l.dissipated_cumulative).collect();
        prop_assert!(d_cum.windows(2).all(|w| w[1] >= w[0]));
    }
}
