use std::fs;
use std::path::Path;

use beam_core::config::ScenarioFile;
use beam_core::model::{validate_scenario, ValidationReport};
use beam_core::BeamError;
use log::warn;

use crate::error::{CliError, CliResult};

pub fn read_scenario(path: &Path) -> CliResult<ScenarioFile> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_scenario(&text)
}

pub fn parse_scenario(text: &str) -> CliResult<ScenarioFile> {
    ScenarioFile::from_toml_str(text).map_err(config_error)
}

pub fn config_error(e: BeamError) -> CliError {
    match e {
        BeamError::Config(msg) => CliError::InvalidScenario(msg),
        other => CliError::InvalidScenario(other.to_string()),
    }
}

/// Validates the scenario, logging warnings. Checks named in `deferred` are
/// left to the solver instead of failing here.
pub fn require_valid(file: &ScenarioFile, deferred: &[&str]) -> CliResult<ValidationReport> {
    let report = validate_scenario(&file.scenario);
    for w in report.warnings() {
        warn!("{}: {}", w.name, w.detail);
    }
    let failures: Vec<String> = report
        .failures()
        .filter(|c| !deferred.contains(&c.name))
        .map(|c| format!("{} ({})", c.name, c.detail))
        .collect();
    if !failures.is_empty() {
        eprint!("{report}");
        return Err(CliError::InvalidScenario(failures.join("; ")));
    }
    Ok(report)
}
