//! TOML scenario files.
//!
//! ```toml
//! [domain]
//! a = 0.0
//! b = 1.0
//!
//! [physics]
//! m = 1.0
//! sigma = 1.0
//!
//! [damping]
//! type = "linear_plus_quadratic"   # or "power_law" with delta, p
//! c = 1.0
//! d = 1.0
//!
//! [restoring]
//! type = "cubic"                   # zero | linear | cubic | smoothed_one_sided
//! kappa = 1.0
//!
//! [forcing]
//! type = "sine_mode"               # zero | sine_mode | samples (values = [...])
//! amplitude = 1.0
//! mode = 1
//!
//! [initial]
//! u0_type = "sine_mode"
//! u0_amplitude = 0.5
//! u0_mode = 1
//! u1_type = "zero"
//!
//! [time]
//! dt = 1e-3
//! t_end = 50.0
//!
//! [discretization]
//! scheme = "fd"                    # or "spectral"
//! n = 200
//! ```
//!
//! Optional `[solver]`, `[output]` and `[verify]` sections override the
//! defaults. Unknown keys, and keys that do not apply to the selected
//! variant, are rejected.

use serde::{Deserialize, Serialize};

use crate::discretization::{Discretization, Grid, Scheme};
use crate::error::{BeamError, Result};
use crate::model::{BeamScenario, DampingLaw, Forcing, RestoringLaw, SpatialProfile};
use crate::settings::SolverSettings;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretizationConfig {
    pub scheme: Scheme,
    pub n: usize,
}

impl Default for DiscretizationConfig {
    fn default() -> Self {
        DiscretizationConfig { scheme: Scheme::FiniteDifference, n: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputConfig {
    /// Append nodal `u` values to every trajectory row.
    pub snapshots: bool,
    pub plots: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { snapshots: false, plots: true }
    }
}

/// Thresholds used when certifying convergence to equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub gap_tol: f64,
    pub v_tol: f64,
    /// `Sigma_T(u(t_end)) - Sigma_T(u_hat)` bound.
    pub sigma_t_tol: f64,
    pub window: f64,
    /// Bound on the smallest late window of damping work.
    pub window_tol: f64,
    /// Bound on `D(t_end) - D(t_end/2)`.
    pub dissipation_tail_tol: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            gap_tol: 1e-6,
            v_tol: 1e-6,
            sigma_t_tol: 1e-10,
            window: 1.0,
            window_tol: 1e-10,
            dissipation_tail_tol: 1e-8,
        }
    }
}

/// Everything a scenario file specifies.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioFile {
    pub scenario: BeamScenario,
    pub discretization: DiscretizationConfig,
    pub solver: SolverSettings,
    pub output: OutputConfig,
    pub verify: VerifyConfig,
}

impl ScenarioFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawFile = toml::from_str(text).map_err(|e| BeamError::Config(e.to_string()))?;
        raw.into_typed()
    }

    pub fn from_table(table: toml::Table) -> Result<Self> {
        let raw: RawFile = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| BeamError::Config(e.to_string()))?;
        raw.into_typed()
    }

    pub fn to_table(&self) -> toml::Table {
        toml::Table::try_from(RawFile::from_typed(self)).expect("scenario serializes to a table")
    }

    /// Canonical text form; re-parses to an identical `ScenarioFile`.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(&RawFile::from_typed(self)).expect("scenario serializes to TOML")
    }

    pub fn build_discretization(&self) -> Result<Discretization> {
        let grid = Grid::new(self.scenario.a, self.scenario.b, self.discretization.n)?;
        Discretization::new(grid, self.discretization.scheme)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    domain: RawDomain,
    physics: RawPhysics,
    damping: RawDamping,
    restoring: RawRestoring,
    #[serde(default)]
    forcing: Option<RawField>,
    #[serde(default)]
    initial: Option<RawInitial>,
    time: RawTime,
    #[serde(default)]
    discretization: Option<RawDiscretization>,
    #[serde(default)]
    solver: Option<RawSolver>,
    #[serde(default)]
    output: Option<RawOutput>,
    #[serde(default)]
    verify: Option<RawVerify>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    a: f64,
    b: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhysics {
    m: f64,
    sigma: f64,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDamping {
    #[serde(rename = "type")]
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRestoring {
    #[serde(rename = "type")]
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawField {
    #[serde(rename = "type")]
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mode: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    values: Option<Vec<f64>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    #[serde(skip_serializing_if = "Option::is_none")]
    u0_type: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    u0_amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    u0_mode: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    u0_values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    u1_type: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    u1_amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    u1_mode: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    u1_values: Option<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    dt: f64,
    t_end: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDiscretization {
    #[serde(default)]
    scheme: Option<String>,
    #[serde(default)]
    n: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    #[serde(default)]
    newton_tol: Option<f64>,
    #[serde(default)]
    newton_max_iter: Option<usize>,
    #[serde(default)]
    stationary_tol: Option<f64>,
    #[serde(default)]
    stationary_max_iter: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    #[serde(default)]
    stride: Option<usize>,
    #[serde(default)]
    snapshots: Option<bool>,
    #[serde(default)]
    plots: Option<bool>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVerify {
    #[serde(default)]
    gap_tol: Option<f64>,
    #[serde(default)]
    v_tol: Option<f64>,
    #[serde(default)]
    sigma_t_tol: Option<f64>,
    #[serde(default)]
    window: Option<f64>,
    #[serde(default)]
    window_tol: Option<f64>,
    #[serde(default)]
    dissipation_tail_tol: Option<f64>,
}

fn cfg_err(msg: impl Into<String>) -> BeamError {
    BeamError::Config(msg.into())
}

fn required<T>(value: Option<T>, section: &str, key: &str, kind: &str) -> Result<T> {
    value.ok_or_else(|| cfg_err(format!("[{section}] type `{kind}` requires `{key}`")))
}

/// Rejects keys that are present but do not belong to the chosen variant.
fn forbid(present: &[(&str, bool)], section: &str, kind: &str) -> Result<()> {
    match present.iter().find(|(_, p)| *p) {
        Some((key, _)) => Err(cfg_err(format!("[{section}] key `{key}` does not apply to type `{kind}`"))),
        None => Ok(()),
    }
}

impl RawDamping {
    fn into_typed(self) -> Result<DampingLaw> {
        let k = self.kind.as_str();
        match k {
            "linear_plus_quadratic" => {
                forbid(&[("delta", self.delta.is_some()), ("p", self.p.is_some())], "damping", k)?;
                Ok(DampingLaw::LinearPlusQuadratic {
                    c: required(self.c, "damping", "c", k)?,
                    d: required(self.d, "damping", "d", k)?,
                })
            }
            "power_law" => {
                forbid(&[("c", self.c.is_some()), ("d", self.d.is_some())], "damping", k)?;
                Ok(DampingLaw::PowerLaw {
                    delta: required(self.delta, "damping", "delta", k)?,
                    p: required(self.p, "damping", "p", k)?,
                })
            }
            other => Err(cfg_err(format!("[damping] unknown type `{other}`"))),
        }
    }

    fn from_typed(law: &DampingLaw) -> Self {
        match *law {
            DampingLaw::LinearPlusQuadratic { c, d } => {
                RawDamping { kind: "linear_plus_quadratic".into(), c: Some(c), d: Some(d), ..Default::default() }
            }
            DampingLaw::PowerLaw { delta, p } => {
                RawDamping { kind: "power_law".into(), delta: Some(delta), p: Some(p), ..Default::default() }
            }
        }
    }
}

impl RawRestoring {
    fn into_typed(self) -> Result<RestoringLaw> {
        let k = self.kind.as_str();
        match k {
            "zero" => {
                forbid(&[("kappa", self.kappa.is_some()), ("eps", self.eps.is_some())], "restoring", k)?;
                Ok(RestoringLaw::Zero)
            }
            "linear" | "cubic" => {
                forbid(&[("eps", self.eps.is_some())], "restoring", k)?;
                let kappa = required(self.kappa, "restoring", "kappa", k)?;
                Ok(if k == "linear" { RestoringLaw::Linear { kappa } } else { RestoringLaw::Cubic { kappa } })
            }
            "smoothed_one_sided" => Ok(RestoringLaw::SmoothedOneSided {
                kappa: required(self.kappa, "restoring", "kappa", k)?,
                eps: required(self.eps, "restoring", "eps", k)?,
            }),
            other => Err(cfg_err(format!("[restoring] unknown type `{other}`"))),
        }
    }

    fn from_typed(law: &RestoringLaw) -> Self {
        match *law {
            RestoringLaw::Zero => RawRestoring { kind: "zero".into(), ..Default::default() },
            RestoringLaw::Linear { kappa } => RawRestoring { kind: "linear".into(), kappa: Some(kappa), eps: None },
            RestoringLaw::Cubic { kappa } => RawRestoring { kind: "cubic".into(), kappa: Some(kappa), eps: None },
            RestoringLaw::SmoothedOneSided { kappa, eps } => {
                RawRestoring { kind: "smoothed_one_sided".into(), kappa: Some(kappa), eps: Some(eps) }
            }
        }
    }
}

/// Shape shared by the forcing and both initial profiles.
enum Field {
    Zero,
    SineMode { amplitude: f64, mode: u32 },
    Samples(Vec<f64>),
}

fn parse_field(
    section: &str,
    kind: &str,
    amplitude: Option<f64>,
    mode: Option<u32>,
    values: Option<Vec<f64>>,
) -> Result<Field> {
    match kind {
        "zero" => {
            forbid(
                &[("amplitude", amplitude.is_some()), ("mode", mode.is_some()), ("values", values.is_some())],
                section,
                kind,
            )?;
            Ok(Field::Zero)
        }
        "sine_mode" => {
            forbid(&[("values", values.is_some())], section, kind)?;
            let mode = required(mode, section, "mode", kind)?;
            if mode == 0 {
                return Err(cfg_err(format!("[{section}] mode must be >= 1")));
            }
            Ok(Field::SineMode { amplitude: required(amplitude, section, "amplitude", kind)?, mode })
        }
        "samples" => {
            forbid(&[("amplitude", amplitude.is_some()), ("mode", mode.is_some())], section, kind)?;
            Ok(Field::Samples(required(values, section, "values", kind)?))
        }
        other => Err(cfg_err(format!("[{section}] unknown type `{other}`"))),
    }
}

fn field_parts(f: Field) -> (String, Option<f64>, Option<u32>, Option<Vec<f64>>) {
    match f {
        Field::Zero => ("zero".into(), None, None, None),
        Field::SineMode { amplitude, mode } => ("sine_mode".into(), Some(amplitude), Some(mode), None),
        Field::Samples(v) => ("samples".into(), None, None, Some(v)),
    }
}

impl From<Field> for Forcing {
    fn from(f: Field) -> Self {
        match f {
            Field::Zero => Forcing::Zero,
            Field::SineMode { amplitude, mode } => Forcing::SineMode { amplitude, mode },
            Field::Samples(v) => Forcing::Samples(v),
        }
    }
}

impl From<Field> for SpatialProfile {
    fn from(f: Field) -> Self {
        match f {
            Field::Zero => SpatialProfile::Zero,
            Field::SineMode { amplitude, mode } => SpatialProfile::SineMode { amplitude, mode },
            Field::Samples(v) => SpatialProfile::Samples(v),
        }
    }
}

fn forcing_field(f: &Forcing) -> Field {
    match f {
        Forcing::Zero => Field::Zero,
        Forcing::SineMode { amplitude, mode } => Field::SineMode { amplitude: *amplitude, mode: *mode },
        Forcing::Samples(v) => Field::Samples(v.clone()),
    }
}

fn profile_field(p: &SpatialProfile) -> Field {
    match p {
        SpatialProfile::Zero => Field::Zero,
        SpatialProfile::SineMode { amplitude, mode } => Field::SineMode { amplitude: *amplitude, mode: *mode },
        SpatialProfile::Samples(v) => Field::Samples(v.clone()),
    }
}

impl RawFile {
    fn into_typed(self) -> Result<ScenarioFile> {
        let forcing = match self.forcing {
            Some(f) => parse_field("forcing", &f.kind, f.amplitude, f.mode, f.values)?.into(),
            None => Forcing::Zero,
        };
        let init = self.initial.unwrap_or_default();
        let u0 = parse_field(
            "initial.u0",
            init.u0_type.as_deref().unwrap_or("zero"),
            init.u0_amplitude,
            init.u0_mode,
            init.u0_values,
        )?
        .into();
        let u1 = parse_field(
            "initial.u1",
            init.u1_type.as_deref().unwrap_or("zero"),
            init.u1_amplitude,
            init.u1_mode,
            init.u1_values,
        )?
        .into();

        let scenario = BeamScenario {
            a: self.domain.a,
            b: self.domain.b,
            m_mass: self.physics.m,
            sigma: self.physics.sigma,
            damping: self.damping.into_typed()?,
            restoring: self.restoring.into_typed()?,
            forcing,
            u0,
            u1,
            t_end: self.time.t_end,
            dt: self.time.dt,
        };

        let mut discretization = DiscretizationConfig::default();
        if let Some(d) = self.discretization {
            if let Some(s) = d.scheme {
                discretization.scheme = s.parse().map_err(|e: BeamError| cfg_err(format!("[discretization] {e}")))?;
            }
            if let Some(n) = d.n {
                discretization.n = n;
            }
        }

        let mut solver = SolverSettings::default();
        if let Some(s) = self.solver {
            solver.newton_tol = s.newton_tol.unwrap_or(solver.newton_tol);
            solver.newton_max_iter = s.newton_max_iter.unwrap_or(solver.newton_max_iter);
            solver.stationary_tol = s.stationary_tol.unwrap_or(solver.stationary_tol);
            solver.stationary_max_iter = s.stationary_max_iter.unwrap_or(solver.stationary_max_iter);
        }
        let mut output = OutputConfig::default();
        if let Some(o) = self.output {
            solver.output_stride = o.stride.unwrap_or(solver.output_stride);
            output.snapshots = o.snapshots.unwrap_or(output.snapshots);
            output.plots = o.plots.unwrap_or(output.plots);
        }
        if solver.output_stride == 0 {
            return Err(cfg_err("[output] stride must be >= 1"));
        }
        let mut verify = VerifyConfig::default();
        if let Some(v) = self.verify {
            verify.gap_tol = v.gap_tol.unwrap_or(verify.gap_tol);
            verify.v_tol = v.v_tol.unwrap_or(verify.v_tol);
            verify.sigma_t_tol = v.sigma_t_tol.unwrap_or(verify.sigma_t_tol);
            verify.window = v.window.unwrap_or(verify.window);
            verify.window_tol = v.window_tol.unwrap_or(verify.window_tol);
            verify.dissipation_tail_tol = v.dissipation_tail_tol.unwrap_or(verify.dissipation_tail_tol);
        }

        Ok(ScenarioFile { scenario, discretization, solver, output, verify })
    }

    fn from_typed(f: &ScenarioFile) -> Self {
        let s = &f.scenario;
        let (kind, amplitude, mode, values) = field_parts(forcing_field(&s.forcing));
        let (u0_type, u0_amplitude, u0_mode, u0_values) = field_parts(profile_field(&s.u0));
        let (u1_type, u1_amplitude, u1_mode, u1_values) = field_parts(profile_field(&s.u1));
        RawFile {
            domain: RawDomain { a: s.a, b: s.b },
            physics: RawPhysics { m: s.m_mass, sigma: s.sigma },
            damping: RawDamping::from_typed(&s.damping),
            restoring: RawRestoring::from_typed(&s.restoring),
            forcing: Some(RawField { kind, amplitude, mode, values }),
            initial: Some(RawInitial {
                u0_type: Some(u0_type),
                u0_amplitude,
                u0_mode,
                u0_values,
                u1_type: Some(u1_type),
                u1_amplitude,
                u1_mode,
                u1_values,
            }),
            time: RawTime { dt: s.dt, t_end: s.t_end },
            discretization: Some(RawDiscretization {
                scheme: Some(f.discretization.scheme.as_str().into()),
                n: Some(f.discretization.n),
            }),
            solver: Some(RawSolver {
                newton_tol: Some(f.solver.newton_tol),
                newton_max_iter: Some(f.solver.newton_max_iter),
                stationary_tol: Some(f.solver.stationary_tol),
                stationary_max_iter: Some(f.solver.stationary_max_iter),
            }),
            output: Some(RawOutput {
                stride: Some(f.solver.output_stride),
                snapshots: Some(f.output.snapshots),
                plots: Some(f.output.plots),
            }),
            verify: Some(RawVerify {
                gap_tol: Some(f.verify.gap_tol),
                v_tol: Some(f.verify.v_tol),
                sigma_t_tol: Some(f.verify.sigma_t_tol),
                window: Some(f.verify.window),
                window_tol: Some(f.verify.window_tol),
                dissipation_tail_tol: Some(f.verify.dissipation_tail_tol),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CANONICAL: &str = r#"
[domain]
a = 0.0
b = 1.0

[physics]
m = 1.0
sigma = 1.0

[damping]
type = "linear_plus_quadratic"
c = 1.0
d = 1.0

[restoring]
type = "cubic"
kappa = 1.0

[forcing]
type = "sine_mode"
amplitude = 1.0
mode = 1

[initial]
u0_type = "sine_mode"
u0_amplitude = 0.5
u0_mode = 1
u1_type = "zero"

[time]
dt = 1e-3
t_end = 50.0

[discretization]
scheme = "fd"
n = 200
"#;

    #[test]
    fn parses_canonical_scenario() {
        let f = ScenarioFile::from_toml_str(CANONICAL).unwrap();
        assert_eq!(f.scenario, BeamScenario::default());
        assert_eq!(f.discretization, DiscretizationConfig::default());
        assert_eq!(f.solver, SolverSettings::default());
    }

    #[test]
    fn unknown_key_is_rejected() {
        let text = CANONICAL.replace("m = 1.0", "m = 1.0\nrho = 2.0");
        let err = ScenarioFile::from_toml_str(&text).unwrap_err();
        assert!(err.to_string().contains("rho"), "{err}");
        let text = format!("{CANONICAL}\n[extras]\nx = 1\n");
        assert!(ScenarioFile::from_toml_str(&text).is_err());
    }

    #[test]
    fn inapplicable_key_is_rejected() {
        let text = CANONICAL.replace("d = 1.0", "d = 1.0\np = 3.0");
        let err = ScenarioFile::from_toml_str(&text).unwrap_err();
        assert!(err.to_string().contains("`p`"), "{err}");
    }

    #[test]
    fn missing_parameter_is_rejected() {
        let text = CANONICAL.replace("kappa = 1.0", "");
        assert!(ScenarioFile::from_toml_str(&text).unwrap_err().to_string().contains("kappa"));
    }

    #[test]
    fn canonical_text_round_trips() {
        let mut f = ScenarioFile::from_toml_str(CANONICAL).unwrap();
        f.scenario.u1 = SpatialProfile::Samples(vec![0.0, 0.25, -1.5e-7, 0.0]);
        f.scenario.damping = DampingLaw::PowerLaw { delta: 0.3, p: 2.5 };
        f.discretization.scheme = Scheme::SpectralSine;
        let text = f.to_toml_string();
        assert_eq!(ScenarioFile::from_toml_str(&text).unwrap(), f);
    }
}
