//! Scenario files, theorem checks and run artifacts.
//!
//! A [`Scenario`] names the environment, initial data, scheme and the checks
//! to evaluate. [`run_scenario`] validates the initial data, runs the
//! simulation with diagnostics, evaluates every requested check and writes
//! `report.json`, `diagnostics.csv`, `field_<t>.csv` and, for cascades,
//! `cascade.csv` into the output directory.

mod checks;
pub mod config;
mod sweep;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

pub use config::{load_config, parse_config, parse_list, ConfigError};
pub use sweep::{sweep, write_sweep_summary, SweepAxis, SweepEntry};

use crate::diagnostics::{DiagnosticsError, InitialConditionReport};
use crate::envdsl::{parse, ParseError};
use crate::grid::{sample, Environment, Grid, GridError, ScalarField};
use crate::steady::{cascade, SteadyError, SteadySolveConfig, UStarCascade};
use crate::stepper::{DiffusionScheme, SchemeConfig, SimState, StepError};

/// The named checks a scenario may request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    GlobalBound,
    SinkExtinction,
    FloorUstar,
    FloorAmin,
    LyapunovIdentity,
    LyapunovThreshold,
    ContinuumSteady,
    OrderedCoexistence,
    CascadeLimit,
    OracleAgreement,
    SteadyIdentity,
}

impl CheckKind {
    pub const ALL: [CheckKind; 11] = [
        CheckKind::GlobalBound,
        CheckKind::SinkExtinction,
        CheckKind::FloorUstar,
        CheckKind::FloorAmin,
        CheckKind::LyapunovIdentity,
        CheckKind::LyapunovThreshold,
        CheckKind::ContinuumSteady,
        CheckKind::OrderedCoexistence,
        CheckKind::CascadeLimit,
        CheckKind::OracleAgreement,
        CheckKind::SteadyIdentity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::GlobalBound => "global-bound",
            CheckKind::SinkExtinction => "sink-extinction",
            CheckKind::FloorUstar => "floor-ustar",
            CheckKind::FloorAmin => "floor-amin",
            CheckKind::LyapunovIdentity => "lyapunov-identity",
            CheckKind::LyapunovThreshold => "lyapunov-threshold",
            CheckKind::ContinuumSteady => "continuum-steady",
            CheckKind::OrderedCoexistence => "ordered-coexistence",
            CheckKind::CascadeLimit => "cascade-limit",
            CheckKind::OracleAgreement => "oracle-agreement",
            CheckKind::SteadyIdentity => "steady-identity",
        }
    }

    pub fn from_name(name: &str) -> Option<CheckKind> {
        CheckKind::ALL.into_iter().find(|k| k.name() == name)
    }

    /// Primary tolerance used when the scenario gives none.
    pub fn default_tolerance(self) -> f64 {
        match self {
            CheckKind::GlobalBound => 1e-6,
            CheckKind::SinkExtinction => 1e-2,
            CheckKind::FloorUstar | CheckKind::FloorAmin => 5e-2,
            CheckKind::LyapunovIdentity => 1e-2,
            CheckKind::LyapunovThreshold => 1e-2,
            CheckKind::ContinuumSteady => 1e-12,
            CheckKind::OrderedCoexistence => 1e-2,
            CheckKind::CascadeLimit => 1e-3,
            CheckKind::OracleAgreement => 1e-3,
            CheckKind::SteadyIdentity => 1e-6,
        }
    }

    /// Whether the check reads the simulated trajectory.
    fn needs_simulation(self) -> bool {
        !matches!(
            self,
            CheckKind::ContinuumSteady
                | CheckKind::CascadeLimit
                | CheckKind::OracleAgreement
                | CheckKind::SteadyIdentity
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckSpec {
    pub kind: CheckKind,
    pub tolerance: Option<f64>,
}

impl CheckSpec {
    pub fn tolerance(&self) -> f64 {
        self.tolerance
            .unwrap_or_else(|| self.kind.default_tolerance())
    }
}

/// Secondary knobs of the checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckParams {
    /// Tolerance of the `v` floors in `sink-extinction`.
    pub floor_tol: f64,
    /// `global-bound` looks at snapshots with `t >= bound_after`.
    pub bound_after: f64,
    /// `lyapunov-threshold` looks at snapshots with `t > threshold_after`.
    pub threshold_after: f64,
    pub k_max: usize,
    /// `steady-identity` requires `max u* <= ||a|| - strict_bound_margin`.
    pub strict_bound_margin: f64,
    pub oracle_horizon: f64,
    /// Coarse and fine step of the oracle convergence ratio.
    pub oracle_dts: [f64; 2],
    /// Step at which the absolute oracle gap is measured.
    pub oracle_fine_dt: f64,
    pub oracle_ratio: f64,
    /// Repeat the start of the run at `dt/2` and doubled resolution.
    pub lyapunov_refine: bool,
    pub lyapunov_refine_horizon: f64,
    pub lyapunov_ratio: f64,
}

impl Default for CheckParams {
    fn default() -> Self {
        CheckParams {
            floor_tol: 5e-2,
            bound_after: 50.0,
            threshold_after: 100.0,
            k_max: 50,
            strict_bound_margin: 1e-3,
            oracle_horizon: 0.1,
            oracle_dts: [0.025, 0.0125],
            oracle_fine_dt: 1e-3,
            oracle_ratio: 3.0,
            lyapunov_refine: true,
            lyapunov_refine_horizon: 10.0,
            lyapunov_ratio: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiffusionChoice {
    #[default]
    Exact,
    BackwardEuler,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub dimension: u8,
    pub extents: [f64; 2],
    pub nodes: [usize; 2],
    pub a: String,
    pub u0: String,
    pub v0: String,
    /// When set, the initial data is `(c, a - c)` and `u0`, `v0` are empty.
    pub c: Option<f64>,
    pub d: f64,
    pub epsilon_v: f64,
    pub dt: f64,
    pub diffusion: DiffusionChoice,
    pub t_max: f64,
    pub settle_tol: f64,
    pub snapshot_every: f64,
    /// Write a field file every this many snapshots (and at the end).
    pub field_every: usize,
    pub checks: Vec<CheckSpec>,
    pub params: CheckParams,
    pub out_dir: PathBuf,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            name: String::new(),
            dimension: 1,
            extents: [1.0, 1.0],
            nodes: [257, 257],
            a: String::new(),
            u0: String::new(),
            v0: String::new(),
            c: None,
            d: 0.1,
            epsilon_v: 0.0,
            dt: 0.01,
            diffusion: DiffusionChoice::Exact,
            t_max: 2000.0,
            settle_tol: 1e-9,
            snapshot_every: 1.0,
            field_every: 10,
            checks: Vec::new(),
            params: CheckParams::default(),
            out_dir: PathBuf::from("out"),
        }
    }
}

impl Scenario {
    /// Source text of `u0` and `v0`.
    pub fn initial_sources(&self) -> (String, String) {
        match self.c {
            Some(c) => (format!("{c:?}"), format!("({}) - {c:?}", self.a)),
            None => (self.u0.clone(), self.v0.clone()),
        }
    }

    pub fn scheme(&self) -> SchemeConfig {
        SchemeConfig {
            dt: self.dt,
            d: self.d,
            epsilon_v: self.epsilon_v,
            diffusion: match self.diffusion {
                DiffusionChoice::Exact => DiffusionScheme::Exact,
                DiffusionChoice::BackwardEuler => DiffusionScheme::BackwardEuler,
            },
        }
    }

    pub fn has_check(&self, kind: CheckKind) -> bool {
        self.checks.iter().any(|c| c.kind == kind)
    }

    /// Check everything that can be checked without sampling the profiles.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |key: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ConfigError::new(key, format!("must be positive, got {v}")))
            }
        };
        if self.name.is_empty() {
            return Err(ConfigError::new("scenario.name", "must not be empty"));
        }
        positive("domain.extent", self.extents[0])?;
        positive("domain.extent", self.extents[1])?;
        positive("scheme.d", self.d)?;
        positive("scheme.dt", self.dt)?;
        positive("run.t_max", self.t_max)?;
        positive("run.settle_tol", self.settle_tol)?;
        positive("run.snapshot_every", self.snapshot_every)?;
        if !(self.epsilon_v.is_finite() && self.epsilon_v >= 0.0) {
            return Err(ConfigError::new("scheme.epsilon_v", "must be nonnegative"));
        }
        if self.field_every == 0 {
            return Err(ConfigError::new("run.field_every", "must be at least 1"));
        }
        if self.nodes[0] < 2 || (self.dimension == 2 && self.nodes[1] < 2) {
            return Err(ConfigError::new(
                "domain.nodes",
                "need at least 2 nodes per axis",
            ));
        }
        if self.params.k_max == 0 {
            return Err(ConfigError::new("params.k_max", "must be at least 1"));
        }
        let [coarse, fine] = self.params.oracle_dts;
        positive("params.oracle_dts", coarse)?;
        positive("params.oracle_dts", fine)?;
        positive("params.oracle_horizon", self.params.oracle_horizon)?;
        positive("params.oracle_fine_dt", self.params.oracle_fine_dt)?;
        let profile = |key: &str, src: &str| {
            parse(src, self.dimension).map_err(|e| ConfigError::new(key, e.to_string()))
        };
        profile("profiles.a", &self.a)?;
        let (u0, v0) = self.initial_sources();
        profile("profiles.u0", &u0)?;
        profile("profiles.v0", &v0)?;
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("scenario {scenario}: {source}")]
    Config {
        scenario: String,
        #[source]
        source: ConfigError,
    },
    #[error("scenario {scenario}: {source}")]
    Step {
        scenario: String,
        #[source]
        source: StepError,
    },
    #[error("scenario {scenario}: {source}")]
    Steady {
        scenario: String,
        #[source]
        source: SteadyError,
    },
    #[error("scenario {scenario}: {source}")]
    Diagnostics {
        scenario: String,
        #[source]
        source: DiagnosticsError,
    },
    #[error("scenario {scenario}: {source}")]
    Setup {
        scenario: String,
        #[source]
        source: GridError,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Comparator {
    #[serde(rename = "<")]
    Below,
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

/// One measured quantity against its threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measurement {
    pub quantity: String,
    pub value: f64,
    pub comparator: Comparator,
    pub threshold: f64,
    pub passed: bool,
}

impl Measurement {
    pub fn new(
        quantity: impl Into<String>,
        value: f64,
        comparator: Comparator,
        threshold: f64,
    ) -> Self {
        let passed = match comparator {
            Comparator::Below => value < threshold,
            Comparator::AtMost => value <= threshold,
            Comparator::AtLeast => value >= threshold,
        };
        Measurement {
            quantity: quantity.into(),
            value,
            comparator,
            threshold,
            passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub check: CheckKind,
    pub status: Status,
    pub measurements: Vec<Measurement>,
    /// Why a check was skipped, or extra context.
    pub note: Option<String>,
}

impl Verdict {
    pub fn from_measurements(check: CheckKind, measurements: Vec<Measurement>) -> Self {
        let status = if measurements.iter().all(|m| m.passed) {
            Status::Pass
        } else {
            Status::Fail
        };
        Verdict {
            check,
            status,
            measurements,
            note: None,
        }
    }

    pub fn skipped(check: CheckKind, reason: impl Into<String>) -> Self {
        Verdict {
            check,
            status: Status::Skipped,
            measurements: Vec::new(),
            note: Some(reason.into()),
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn measurement(&self, quantity: &str) -> Option<&Measurement> {
        self.measurements.iter().find(|m| m.quantity == quantity)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FinalSummary {
    pub t: f64,
    pub settled: bool,
    /// Last measured change per unit time, if any.
    pub rate: Option<f64>,
    pub sup_u: f64,
    pub sup_v: f64,
    pub min_u: f64,
    pub min_v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub verdicts: Vec<Verdict>,
    pub initial_conditions: Vec<InitialConditionReport>,
    pub wall_time_s: f64,
    /// Absent when no requested check needed the simulation.
    pub final_state: Option<FinalSummary>,
    pub files: Vec<PathBuf>,
}

impl RunReport {
    /// No non-skipped check failed.
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.status != Status::Fail)
    }

    pub fn verdict(&self, check: CheckKind) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.check == check)
    }
}

/// The sampled grid, environment and initial data of a scenario.
pub struct Setup {
    pub grid: Arc<Grid>,
    pub env: Environment,
    pub u0: ScalarField,
    pub v0: ScalarField,
}

fn profile_error(scenario: &Scenario, key: &str, e: ParseError) -> RunnerError {
    RunnerError::Config {
        scenario: scenario.name.clone(),
        source: ConfigError::new(key, e.to_string()),
    }
}

/// Build the grid and sample every profile.
pub fn setup(scenario: &Scenario) -> Result<Setup, RunnerError> {
    let grid_err = |source| RunnerError::Setup {
        scenario: scenario.name.clone(),
        source,
    };
    let grid = Grid::new(scenario.dimension, scenario.extents, scenario.nodes).map_err(grid_err)?;
    let a = parse(&scenario.a, scenario.dimension)
        .map_err(|e| profile_error(scenario, "profiles.a", e))?;
    let env = Environment::new(a, &grid).map_err(grid_err)?;
    let (u0_src, v0_src) = scenario.initial_sources();
    let u0 = parse(&u0_src, scenario.dimension)
        .map_err(|e| profile_error(scenario, "profiles.u0", e))?;
    let v0 = parse(&v0_src, scenario.dimension)
        .map_err(|e| profile_error(scenario, "profiles.v0", e))?;
    let u0 = sample(&u0, &grid).map_err(grid_err)?;
    let v0 = sample(&v0, &grid).map_err(grid_err)?;
    Ok(Setup { grid, env, u0, v0 })
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> RunnerError + '_ {
    move |source| RunnerError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, RunnerError> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

/// `field_<t>.csv` file name for snapshot time `t`.
pub fn field_file_name(t: f64) -> String {
    format!("field_{t:011.3}.csv")
}

/// One row per node: `x[,y],u,v`.
pub fn write_state_csv<W: Write>(state: &SimState, mut out: W) -> io::Result<()> {
    let grid = state.u.grid();
    if grid.dimension() == 1 {
        writeln!(out, "x,u,v")?;
    } else {
        writeln!(out, "x,y,u,v")?;
    }
    for (i, (u, v)) in state.u.values().iter().zip(state.v.values()).enumerate() {
        for c in grid.coords(i) {
            write!(out, "{c:?},")?;
        }
        writeln!(out, "{u:?},{v:?}")?;
    }
    Ok(())
}

/// Validate only: parse the profiles and evaluate the initial-data hypotheses
/// of the requested checks.
pub fn check_scenario(scenario: &Scenario) -> Result<Vec<InitialConditionReport>, RunnerError> {
    scenario.validate().map_err(|source| RunnerError::Config {
        scenario: scenario.name.clone(),
        source,
    })?;
    let s = setup(scenario)?;
    SimState::new(s.u0.clone(), s.v0.clone()).map_err(|source| RunnerError::Step {
        scenario: scenario.name.clone(),
        source,
    })?;
    checks::initial_reports(scenario, &s)
}

/// Run a scenario and write its artifacts into `scenario.out_dir`.
pub fn run_scenario(scenario: &Scenario) -> Result<RunReport, RunnerError> {
    let started = Instant::now();
    scenario.validate().map_err(|source| RunnerError::Config {
        scenario: scenario.name.clone(),
        source,
    })?;
    let s = setup(scenario)?;
    let out = &scenario.out_dir;
    fs::create_dir_all(out).map_err(io_err(out))?;
    let mut report = checks::evaluate(scenario, &s)?;
    report.wall_time_s = started.elapsed().as_secs_f64();
    let path = out.join("report.json");
    report.files.push(path.clone());
    let mut w = create(&path)?;
    serde_json::to_writer_pretty(&mut w, &report).map_err(|e| RunnerError::Io {
        path: path.clone(),
        source: e.into(),
    })?;
    writeln!(w).and_then(|_| w.flush()).map_err(io_err(&path))?;
    Ok(report)
}

/// Build the cascade for the scenario's environment and write `cascade.csv`.
pub fn run_cascade(
    scenario: &Scenario,
    k_max: usize,
) -> Result<(UStarCascade, PathBuf), RunnerError> {
    let s = setup(scenario)?;
    let cfg = SteadySolveConfig {
        dt: scenario.dt,
        ..SteadySolveConfig::default()
    };
    let c = cascade(&s.env, scenario.d, k_max, &cfg).map_err(|source| RunnerError::Steady {
        scenario: scenario.name.clone(),
        source,
    })?;
    let out = &scenario.out_dir;
    fs::create_dir_all(out).map_err(io_err(out))?;
    let path = out.join("cascade.csv");
    let mut w = create(&path)?;
    c.write_csv(&mut w)
        .and_then(|_| w.flush())
        .map_err(io_err(&path))?;
    Ok((c, path))
}
