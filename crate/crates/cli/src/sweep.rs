use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use beam_core::config::ScenarioFile;
use beam_core::diagnostics::convergence_report;
use beam_core::dynamics::run;
use beam_core::model::validate_scenario;
use beam_core::stationary::solve_stationary;
use log::{debug, info};
use rayon::prelude::*;
use serde_json::json;
use toml::{Table, Value};

use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, fmt_f64, write_csv, RunManifest};
use crate::scenario::config_error;

/// `section.key=v1,v2,...`
#[derive(Debug, Clone, PartialEq)]
pub struct SweepParam {
    pub section: String,
    pub key: String,
    pub values: Vec<Value>,
}

impl SweepParam {
    pub fn name(&self) -> String {
        format!("{}.{}", self.section, self.key)
    }
}

/// Numbers and booleans are read as TOML literals; anything else is a string.
fn parse_value(raw: &str) -> Value {
    match Table::from_str(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => Value::String(raw.to_string()),
    }
}

impl FromStr for SweepParam {
    type Err = CliError;

    fn from_str(spec: &str) -> CliResult<Self> {
        let bad = || CliError::InvalidScenario(format!("sweep parameter must look like section.key=v1,v2: {spec:?}"));
        let (path, list) = spec.split_once('=').ok_or_else(bad)?;
        let (section, key) = path.trim().split_once('.').ok_or_else(bad)?;
        if section.is_empty() || key.is_empty() || key.contains('.') {
            return Err(bad());
        }
        let values = list
            .split(',')
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .map(parse_value)
            .collect();
        Ok(SweepParam { section: section.to_string(), key: key.to_string(), values })
    }
}

fn display_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Index tuples of the Cartesian product in lexicographic order (last
/// parameter varies fastest). Empty if any list is empty.
pub fn product_indices(sizes: &[usize]) -> Vec<Vec<usize>> {
    if sizes.contains(&0) {
        return Vec::new();
    }
    let total: usize = sizes.iter().product();
    (0..total)
        .map(|mut k| {
            let mut idx = vec![0; sizes.len()];
            for (slot, &n) in idx.iter_mut().zip(sizes).rev() {
                *slot = k % n;
                k /= n;
            }
            idx
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSummary {
    pub settled_at: Option<f64>,
    pub energy_final: f64,
    pub dissipated_cumulative: f64,
    pub newton_steps: usize,
    pub newton_mean_iters: f64,
    pub newton_max_iters: usize,
    pub newton_max_residual: f64,
    pub halvings: usize,
}

pub const SUMMARY_COLUMNS: [&str; 8] = [
    "settled_at",
    "energy_final",
    "dissipated_cumulative",
    "newton_steps",
    "newton_mean_iters",
    "newton_max_iters",
    "newton_max_residual",
    "halvings",
];

impl RunSummary {
    fn cells(&self) -> Vec<String> {
        vec![
            self.settled_at.map(fmt_f64).unwrap_or_default(),
            fmt_f64(self.energy_final),
            fmt_f64(self.dissipated_cumulative),
            self.newton_steps.to_string(),
            fmt_f64(self.newton_mean_iters),
            self.newton_max_iters.to_string(),
            fmt_f64(self.newton_max_residual),
            self.halvings.to_string(),
        ]
    }
}

fn apply_overrides(base: &Table, params: &[SweepParam], idx: &[usize]) -> CliResult<Table> {
    let mut table = base.clone();
    for (p, &i) in params.iter().zip(idx) {
        let section = table
            .entry(p.section.clone())
            .or_insert_with(|| Value::Table(Table::new()));
        match section {
            Value::Table(t) => {
                t.insert(p.key.clone(), p.values[i].clone());
            }
            _ => return Err(CliError::InvalidScenario(format!("[{}] is not a table", p.section))),
        }
    }
    Ok(table)
}

/// Simulates one parameter combination. Validation and solver failures are
/// returned as messages for the row.
pub fn run_one(table: Table) -> Result<RunSummary, String> {
    let file = ScenarioFile::from_table(table).map_err(|e| e.to_string())?;
    let report = validate_scenario(&file.scenario);
    let failures: Vec<String> = report.failures().map(|c| format!("{}: {}", c.name, c.detail)).collect();
    if !failures.is_empty() {
        return Err(format!("invalid scenario ({})", failures.join("; ")));
    }
    let disc = file.build_discretization().map_err(|e| e.to_string())?;
    let traj = run(&file.scenario, &disc, file.solver).map_err(|e| e.to_string())?;
    let settled_at = match solve_stationary(&file.scenario, &disc, None, &file.solver) {
        Ok(sol) => convergence_report(&traj, &disc, &sol, file.verify.gap_tol, file.verify.v_tol)
            .map_err(|e| e.to_string())?
            .settled_at,
        Err(e) => {
            debug!("no stationary solution: {e}");
            None
        }
    };
    let last = traj.ledgers.last().expect("trajectory has a ledger");
    Ok(RunSummary {
        settled_at,
        energy_final: last.total,
        dissipated_cumulative: last.dissipated_cumulative,
        newton_steps: traj.stats.steps,
        newton_mean_iters: traj.stats.mean_iters(),
        newton_max_iters: traj.stats.max_iters,
        newton_max_residual: traj.stats.max_residual,
        halvings: traj.stats.halvings,
    })
}

/// Runs the Cartesian product of `params` on top of the scenario file and
/// writes `sweep.csv`. Rows follow the product order whatever the
/// completion order. Fails only if every run fails.
pub fn sweep(scenario_path: &Path, params: &[SweepParam], out_dir: &Path, jobs: Option<usize>) -> CliResult<()> {
    let start = Instant::now();
    let text = fs::read_to_string(scenario_path).map_err(|e| CliError::io(scenario_path, e))?;
    let base: Table = Table::from_str(&text).map_err(|e| CliError::InvalidScenario(e.to_string()))?;
    let base_file = ScenarioFile::from_table(base.clone()).map_err(config_error)?;
    let base_disc = base_file.build_discretization().map_err(config_error)?;
    ensure_dir(out_dir)?;

    let sizes: Vec<usize> = params.iter().map(|p| p.values.len()).collect();
    let combos = product_indices(&sizes);
    let tables = combos
        .iter()
        .map(|idx| apply_overrides(&base, params, idx))
        .collect::<CliResult<Vec<_>>>()?;

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder.build().map_err(|e| CliError::InvalidScenario(format!("thread pool: {e}")))?;
    info!("sweeping {} runs on {} threads", tables.len(), pool.current_num_threads());
    let results: Vec<Result<RunSummary, String>> = pool.install(|| tables.into_par_iter().map(run_one).collect());

    let mut header = vec!["run".to_string()];
    header.extend(params.iter().map(SweepParam::name));
    header.push("status".into());
    header.extend(SUMMARY_COLUMNS.iter().map(|s| s.to_string()));
    header.push("error".into());

    let mut rows = Vec::with_capacity(results.len());
    for (k, (idx, result)) in combos.iter().zip(&results).enumerate() {
        let mut r = vec![k.to_string()];
        r.extend(params.iter().zip(idx).map(|(p, &i)| display_value(&p.values[i])));
        match result {
            Ok(s) => {
                r.push("ok".into());
                r.extend(s.cells());
                r.push(String::new());
            }
            Err(msg) => {
                r.push("failed".into());
                r.extend(std::iter::repeat_n(String::new(), SUMMARY_COLUMNS.len()));
                r.push(msg.clone());
            }
        }
        rows.push(r);
    }
    write_csv(&out_dir.join("sweep.csv"), &header, &rows)?;

    let failed = results.iter().filter(|r| r.is_err()).count();
    let mut manifest = RunManifest::new("sweep", scenario_path, &base_file, &base_disc);
    manifest.results = json!({
        "runs": results.len(),
        "failed": failed,
        "parameters": params.iter().map(|p| json!({
            "name": p.name(),
            "values": p.values.iter().map(display_value).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    });
    manifest.outputs = vec!["sweep.csv".into()];
    manifest.wall_time_s = start.elapsed().as_secs_f64();
    manifest.write(out_dir)?;
    println!("sweep: {} runs, {failed} failed; results in {}", results.len(), out_dir.join("sweep.csv").display());

    if !results.is_empty() && failed == results.len() {
        return Err(CliError::SweepFailed(failed));
    }
    Ok(())
}
