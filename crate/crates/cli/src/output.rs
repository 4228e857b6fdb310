use std::fs;
use std::path::{Path, PathBuf};

use beam_core::config::ScenarioFile;
use beam_core::discretization::Discretization;
use beam_core::dynamics::Trajectory;
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const TRAJECTORY_COLUMNS: [&str; 9] = [
    "t",
    "energy_total",
    "kinetic",
    "elastic",
    "potential",
    "forcing",
    "dissipated_cumulative",
    "h2star_norm_u",
    "l2_norm_v",
];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write_file(path: &Path, contents: &[u8]) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Writes through a temporary file and renames it into place, so readers
/// never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    write_file(&tmp, contents)?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

fn csv_writer(path: &Path) -> CliResult<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    CliError::io(path, e.into())
}

pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// One row per stored snapshot; nodal displacements are appended when
/// `snapshots` is set.
pub fn write_trajectory(path: &Path, traj: &Trajectory, disc: &Discretization, snapshots: bool) -> CliResult<()> {
    let mut header: Vec<String> = TRAJECTORY_COLUMNS.iter().map(|s| s.to_string()).collect();
    if snapshots {
        header.extend((1..=disc.dim()).map(|i| format!("u_{i}")));
    }
    let mut rows = Vec::with_capacity(traj.snapshots.len());
    let mut j = 0;
    for st in &traj.snapshots {
        while j + 1 < traj.ledgers.len() && traj.ledgers[j].t < st.t {
            j += 1;
        }
        let l = &traj.ledgers[j];
        let mut row: Vec<String> = [
            l.t,
            l.total,
            l.kinetic,
            l.elastic,
            l.potential,
            l.forcing,
            l.dissipated_cumulative,
            l.h2star_norm_u,
            l.l2_norm_v,
        ]
        .iter()
        .map(|&x| fmt_f64(x))
        .collect();
        if snapshots {
            row.extend(disc.to_nodal(&st.u)?.into_iter().map(fmt_f64));
        }
        rows.push(row);
    }
    write_csv(path, &header, &rows)
}

/// `x, u_hat` on the full grid, boundary nodes included.
pub fn write_profile(path: &Path, disc: &Discretization, nodal: &[f64]) -> CliResult<()> {
    let grid = disc.grid();
    let n = grid.n_interior();
    let header = vec!["x".to_string(), "u_hat".to_string()];
    let mut rows = vec![vec![fmt_f64(grid.a()), fmt_f64(0.0)]];
    rows.extend((0..n).map(|i| vec![fmt_f64(grid.node(i + 1)), fmt_f64(nodal[i])]));
    rows.push(vec![fmt_f64(grid.b()), fmt_f64(0.0)]);
    write_csv(path, &header, &rows)
}

#[derive(Debug, Serialize)]
pub struct DiscretizationSummary {
    pub scheme: &'static str,
    pub n_interior: usize,
    pub h: f64,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Serialize)]
pub struct Tolerances {
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub stationary_tol: f64,
    pub stationary_max_iter: usize,
    pub gap_tol: f64,
    pub v_tol: f64,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: &'static str,
    pub scenario_path: String,
    pub tool_version: &'static str,
    pub discretization: DiscretizationSummary,
    pub tolerances: Tolerances,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
    pub results: serde_json::Value,
}

impl RunManifest {
    pub fn new(command: &'static str, scenario_path: &Path, file: &ScenarioFile, disc: &Discretization) -> Self {
        let grid = disc.grid();
        RunManifest {
            command,
            scenario_path: scenario_path.display().to_string(),
            tool_version: env!("CARGO_PKG_VERSION"),
            discretization: DiscretizationSummary {
                scheme: disc.scheme().as_str(),
                n_interior: grid.n_interior(),
                h: grid.h(),
                a: grid.a(),
                b: grid.b(),
            },
            tolerances: Tolerances {
                newton_tol: file.solver.newton_tol,
                newton_max_iter: file.solver.newton_max_iter,
                stationary_tol: file.solver.stationary_tol,
                stationary_max_iter: file.solver.stationary_max_iter,
                gap_tol: file.verify.gap_tol,
                v_tol: file.verify.v_tol,
            },
            wall_time_s: 0.0,
            outputs: Vec::new(),
            results: serde_json::Value::Null,
        }
    }

    /// Written last: every listed output already exists.
    pub fn write(&self, out_dir: &Path) -> CliResult<PathBuf> {
        let path = out_dir.join("manifest.json");
        let json = serde_json::to_vec_pretty(self).expect("manifest serializes");
        write_atomic(&path, &json)?;
        Ok(path)
    }
}
