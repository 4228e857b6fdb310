use std::path::Path;
use std::time::Instant;

use beam_core::config::ScenarioFile;
use beam_core::diagnostics::{
    check_bounds, check_energy_identity, check_energy_monotone, convergence_report, monotonicity_tolerance,
    windowed_dissipation, ConvergenceReport,
};
use beam_core::discretization::Discretization;
use beam_core::dynamics::{run, Trajectory};
use beam_core::model::{validate_scenario, CheckStatus};
use beam_core::stationary::{residual_bvp, solve_stationary, StationarySolution};
use log::{info, warn};
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, write_file, write_profile, write_trajectory, RunManifest};
use crate::plot::Chart;
use crate::scenario::{config_error, read_scenario, require_valid};

fn discretize(file: &ScenarioFile) -> CliResult<Discretization> {
    file.build_discretization().map_err(config_error)
}

fn simulate_file(file: &ScenarioFile, disc: &Discretization) -> CliResult<Trajectory> {
    let start = Instant::now();
    let traj = run(&file.scenario, disc, file.solver)?;
    info!(
        "{} steps in {:.2}s, mean newton iterations {:.2}, halvings {}",
        traj.stats.steps,
        start.elapsed().as_secs_f64(),
        traj.stats.mean_iters(),
        traj.stats.halvings
    );
    Ok(traj)
}

fn solve(file: &ScenarioFile, disc: &Discretization) -> CliResult<StationarySolution> {
    Ok(solve_stationary(&file.scenario, disc, None, &file.solver)?)
}

fn write_canonical(out_dir: &Path, file: &ScenarioFile, outputs: &mut Vec<String>) -> CliResult<()> {
    write_file(&out_dir.join("scenario.toml"), file.to_toml_string().as_bytes())?;
    outputs.push("scenario.toml".into());
    Ok(())
}

fn newton_json(traj: &Trajectory) -> serde_json::Value {
    let s = traj.stats;
    json!({
        "steps": s.steps,
        "total_iterations": s.total_iters,
        "max_iterations": s.max_iters,
        "mean_iterations": s.mean_iters(),
        "max_residual": s.max_residual,
        "halvings": s.halvings,
    })
}

pub fn simulate(scenario_path: &Path, out_dir: &Path) -> CliResult<()> {
    let start = Instant::now();
    let file = read_scenario(scenario_path)?;
    require_valid(&file, &[])?;
    let disc = discretize(&file)?;
    ensure_dir(out_dir)?;

    let traj = simulate_file(&file, &disc)?;
    let mut outputs = Vec::new();
    write_trajectory(&out_dir.join("trajectory.csv"), &traj, &disc, file.output.snapshots)?;
    outputs.push("trajectory.csv".into());
    write_canonical(out_dir, &file, &mut outputs)?;

    let mut settled_at = None;
    if file.output.plots {
        let energy: Vec<(f64, f64)> = traj.ledgers.iter().map(|l| (l.t, l.total)).collect();
        let chart = Chart { title: "Total energy", x_label: "t", y_label: "E", log_y: false };
        write_file(&out_dir.join("energy.svg"), chart.render(&energy).as_bytes())?;
        outputs.push("energy.svg".into());

        match solve(&file, &disc) {
            Ok(sol) => {
                let report = convergence_report(&traj, &disc, &sol, file.verify.gap_tol, file.verify.v_tol)?;
                settled_at = report.settled_at;
                let gap: Vec<(f64, f64)> = report.times.iter().copied().zip(report.h2star_gap.iter().copied()).collect();
                let chart = Chart { title: "Distance to equilibrium", x_label: "t", y_label: "|u - u_hat|_H2*", log_y: true };
                write_file(&out_dir.join("gap.svg"), chart.render(&gap).as_bytes())?;
                outputs.push("gap.svg".into());
            }
            Err(e) => warn!("skipping gap.svg: {e}"),
        }
    }

    let last = traj.ledgers.last().expect("trajectory has a ledger");
    let mut manifest = RunManifest::new("simulate", scenario_path, &file, &disc);
    manifest.results = json!({
        "t_end": last.t,
        "energy_initial": traj.ledgers[0].total,
        "energy_final": last.total,
        "dissipated_cumulative": last.dissipated_cumulative,
        "monotonicity_violations": check_energy_monotone(&traj).violations,
        "identity_residual": check_energy_identity(&traj),
        "settled_at": settled_at,
        "newton": newton_json(&traj),
    });
    manifest.outputs = outputs;
    manifest.wall_time_s = start.elapsed().as_secs_f64();
    let path = manifest.write(out_dir)?;
    println!("simulated to t = {} ({} steps); manifest {}", last.t, traj.stats.steps, path.display());
    Ok(())
}

pub fn stationary(scenario_path: &Path, out_dir: &Path) -> CliResult<()> {
    let start = Instant::now();
    let file = read_scenario(scenario_path)?;
    // Convexity is certified node by node by the solver itself.
    require_valid(&file, &["convexity"])?;
    let disc = discretize(&file)?;
    ensure_dir(out_dir)?;

    let sol = solve(&file, &disc)?;
    let nodal = disc.to_nodal(&sol.u_hat)?;
    let mut outputs = Vec::new();
    write_profile(&out_dir.join("stationary.csv"), &disc, &nodal)?;
    outputs.push("stationary.csv".into());
    write_canonical(out_dir, &file, &mut outputs)?;
    if file.output.plots {
        let grid = disc.grid();
        let mut pts = vec![(grid.a(), 0.0)];
        pts.extend(grid.nodes().zip(nodal.iter().copied()));
        pts.push((grid.b(), 0.0));
        let chart = Chart { title: "Stationary deflection", x_label: "x", y_label: "u_hat", log_y: false };
        write_file(&out_dir.join("stationary.svg"), chart.render(&pts).as_bytes())?;
        outputs.push("stationary.svg".into());
    }

    let mut manifest = RunManifest::new("stationary", scenario_path, &file, &disc);
    manifest.results = json!({
        "certificate": {
            "grad_norm": sol.grad_norm,
            "residual_floor": sol.residual_floor,
            "sigma_t": sol.sigma_t_value,
            "newton_iterations": sol.newton_iters,
        },
        "residual_bvp": residual_bvp(&sol.u_hat, &file.scenario, &disc)?,
        "max_abs_u_hat": nodal.iter().fold(0.0f64, |m, x| m.max(x.abs())),
    });
    manifest.outputs = outputs;
    manifest.wall_time_s = start.elapsed().as_secs_f64();
    let path = manifest.write(out_dir)?;
    println!(
        "stationary solution: grad_norm {:.3e}, Sigma_T {:.12e}, {} newton iterations; manifest {}",
        sol.grad_norm,
        sol.sigma_t_value,
        sol.newton_iters,
        path.display()
    );
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyRow {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn row(name: &'static str, pass: bool, detail: String) -> VerifyRow {
    VerifyRow { name, pass, detail }
}

fn print_table(rows: &[VerifyRow]) {
    for r in rows {
        println!("{:<4}  {:<20} {}", if r.pass { "PASS" } else { "FAIL" }, r.name, r.detail);
    }
}

fn finish(rows: Vec<VerifyRow>) -> CliResult<Vec<VerifyRow>> {
    print_table(&rows);
    let failed: Vec<String> = rows.iter().filter(|r| !r.pass).map(|r| r.name.to_string()).collect();
    if failed.is_empty() {
        Ok(rows)
    } else {
        Err(CliError::VerificationFailed(failed))
    }
}

/// Runs every check on the scenario and prints a PASS/FAIL table.
pub fn verify(scenario_path: &Path) -> CliResult<Vec<VerifyRow>> {
    let file = read_scenario(scenario_path)?;
    let report = validate_scenario(&file.scenario);
    let failures: Vec<String> = report.failures().map(|c| format!("{}: {}", c.name, c.detail)).collect();
    let warnings = report.checks.iter().filter(|c| c.status == CheckStatus::Warn).count();
    if !failures.is_empty() {
        return finish(vec![row("validation", false, failures.join("; "))]);
    }
    let mut rows = vec![row("validation", true, format!("{} checks, {warnings} warnings", report.checks.len()))];

    let disc = discretize(&file)?;
    let traj = simulate_file(&file, &disc)?;
    let steps = traj.ledgers.len() - 1;
    let tol = monotonicity_tolerance(file.solver.newton_tol);

    let mono = check_energy_monotone(&traj);
    rows.push(row(
        "monotonicity",
        mono.violations == 0,
        format!("{} violations, worst rise {:.2e} (tol {tol:.0e})", mono.violations, mono.worst),
    ));

    let identity = check_energy_identity(&traj);
    let identity_bound = tol * steps as f64;
    rows.push(row(
        "energy identity",
        identity <= identity_bound,
        format!("worst {identity:.2e} (bound {identity_bound:.2e})"),
    ));

    let b = check_bounds(&traj);
    let e0 = traj.ledgers[0].total;
    let e_min = traj.ledgers.iter().map(|l| l.total).fold(f64::INFINITY, f64::min);
    let bounded = b.sup_h2star.is_finite()
        && b.sup_dissipated.is_finite()
        && b.sup_h2star_late <= b.sup_h2star
        && b.sup_dissipated <= e0 - e_min + identity_bound;
    rows.push(row(
        "bounds",
        bounded,
        format!(
            "sup |u|^2_H2* {:.4e} (late {:.4e}), dissipated {:.6e} <= E(0) - min E = {:.6e}",
            b.sup_h2star,
            b.sup_h2star_late,
            b.sup_dissipated,
            e0 - e_min
        ),
    ));

    rows.push(window_row(&traj, &file));

    let stationary = solve(&file, &disc);
    match &stationary {
        Ok(sol) => {
            let limit = file.solver.stationary_tol.max(sol.residual_floor);
            rows.push(row(
                "stationary",
                sol.grad_norm <= limit,
                format!("grad_norm {:.2e} (limit {limit:.2e}), {} newton iterations", sol.grad_norm, sol.newton_iters),
            ));
            let conv = convergence_report(&traj, &disc, sol, file.verify.gap_tol, file.verify.v_tol)?;
            rows.push(settled_row(&conv, b.dissipated_tail, &file));
        }
        Err(e) => {
            rows.push(row("stationary", false, e.to_string()));
            rows.push(row("settled", false, "no stationary solution".into()));
        }
    }
    finish(rows)
}

fn window_row(traj: &Trajectory, file: &ScenarioFile) -> VerifyRow {
    let series = match windowed_dissipation(traj, file.verify.window) {
        Ok(s) if !s.is_empty() => s,
        Ok(_) => return row("dissipation window", false, "empty window series".into()),
        Err(e) => return row("dissipation window", false, e.to_string()),
    };
    let half = series.len() / 2;
    let min = |s: &[(f64, f64)]| s.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let early = min(&series[..half.max(1)]);
    let late = min(&series[half..]);
    row(
        "dissipation window",
        late <= early || late < file.verify.window_tol,
        format!("min work over window {}: early {early:.2e}, late {late:.2e}", file.verify.window),
    )
}

fn settled_row(conv: &ConvergenceReport, tail: f64, file: &ScenarioFile) -> VerifyRow {
    let v = &file.verify;
    let excess = conv.final_sigma_t_excess();
    let pass = conv.settled_at.is_some()
        && excess <= v.sigma_t_tol
        && conv.floor_violations == 0
        && tail <= v.dissipation_tail_tol;
    let when = conv.settled_at.map_or("never".to_string(), |t| format!("t = {t}"));
    row(
        "settled",
        pass,
        format!(
            "{when}; final gap {:.2e}, |v| {:.2e}, Sigma_T excess {excess:.2e}, dissipation tail {tail:.2e}",
            conv.final_gap(),
            conv.final_v()
        ),
    )
}
