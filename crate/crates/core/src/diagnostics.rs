//! Snapshot diagnostics: the Lyapunov functional `M(t) = ∫ ln(v/u)` and its
//! dissipation identity `dM/dt = -d ∫ |∇ ln u|^2`, the threshold `M_#`,
//! theorem floors for `v`, the a priori bound, and initial-data hypotheses.

use std::io::{self, Write};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::grid::{Environment, Grid, GridError, ScalarField};
use crate::linops::grad_log_energy;
use crate::stepper::SimState;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error("{species} is not strictly positive at node {index} (value {value})")]
    NonPositiveField {
        species: &'static str,
        index: usize,
        value: f64,
    },
    #[error("record {index} has no Lyapunov value")]
    UndefinedM { index: usize },
    #[error("records are not uniformly spaced in time (record {index})")]
    NonUniformSpacing { index: usize },
    #[error("M_# needs a_min > 0, got {a_min}")]
    PreconditionSinkPresent { a_min: f64 },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Per-snapshot summary. `None` marks a quantity that is undefined at that snapshot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub sup_norm_u: f64,
    pub sup_norm_v: f64,
    pub min_u: f64,
    pub min_v: f64,
    pub lyapunov_m: Option<f64>,
    pub grad_log_energy_u: Option<f64>,
    pub floor_violation: Option<f64>,
    pub bound_excess: f64,
}

impl DiagnosticsRecord {
    /// Summarise `state`. `floor_reference` selects the floor `[a - reference]_+`
    /// for `floor_violation`.
    pub fn from_state(
        state: &SimState,
        env: &Environment,
        floor_reference: Option<&ScalarField>,
    ) -> Self {
        let sup_norm_u = state.u.sup_norm();
        let sup_norm_v = state.v.sup_norm();
        let min_u = state.u.min_value();
        let min_v = state.v.min_value();
        let positive = min_u > 0.0 && min_v > 0.0;
        DiagnosticsRecord {
            t: state.t,
            sup_norm_u,
            sup_norm_v,
            min_u,
            min_v,
            lyapunov_m: positive.then(|| lyapunov_m(state).ok()).flatten(),
            grad_log_energy_u: (min_u > 0.0)
                .then(|| grad_log_energy(&state.u).ok())
                .flatten(),
            floor_violation: floor_reference.and_then(|r| floor_check(state, env, r).ok()),
            bound_excess: sup_norm_u.max(sup_norm_v) - env.a_sup(),
        }
    }

    pub const CSV_HEADER: &'static str =
        "t,sup_u,sup_v,min_u,min_v,M,gradlog,floor_violation,bound_excess";

    /// One CSV row; undefined values become empty cells.
    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
        format!(
            "{:?},{:?},{:?},{:?},{:?},{},{},{},{:?}",
            self.t,
            self.sup_norm_u,
            self.sup_norm_v,
            self.min_u,
            self.min_v,
            opt(self.lyapunov_m),
            opt(self.grad_log_energy_u),
            opt(self.floor_violation),
            self.bound_excess
        )
    }
}

pub fn write_diagnostics_csv<W: Write>(
    records: &[DiagnosticsRecord],
    mut out: W,
) -> io::Result<()> {
    writeln!(out, "{}", DiagnosticsRecord::CSV_HEADER)?;
    for r in records {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

fn first_nonpositive(species: &'static str, f: &ScalarField) -> Result<(), DiagnosticsError> {
    match f.values().iter().enumerate().find(|(_, &v)| v <= 0.0) {
        Some((index, &value)) => Err(DiagnosticsError::NonPositiveField {
            species,
            index,
            value,
        }),
        None => Ok(()),
    }
}

/// `M = ∫ (ln v - ln u)`.
pub fn lyapunov_m(state: &SimState) -> Result<f64, DiagnosticsError> {
    first_nonpositive("u", &state.u)?;
    first_nonpositive("v", &state.v)?;
    Ok(state
        .v
        .zip_map(&state.u, |v, u| v.ln() - u.ln())?
        .integrate())
}

/// Central-difference residual of `dM/dt + d ∫ |∇ ln u|^2` at every interior record.
pub fn lyapunov_residual(
    history: &[DiagnosticsRecord],
    d: f64,
) -> Result<Vec<f64>, DiagnosticsError> {
    if history.len() < 3 {
        return Ok(Vec::new());
    }
    let delta = history[1].t - history[0].t;
    for (i, w) in history.windows(2).enumerate() {
        let step = w[1].t - w[0].t;
        if (step - delta).abs() > 1e-9 * delta.abs().max(1.0) || step <= 0.0 {
            return Err(DiagnosticsError::NonUniformSpacing { index: i + 1 });
        }
    }
    let m = |i: usize| {
        history[i]
            .lyapunov_m
            .ok_or(DiagnosticsError::UndefinedM { index: i })
    };
    (1..history.len() - 1)
        .map(|i| {
            let dm = (m(i + 1)? - m(i - 1)?) / (2.0 * delta);
            let energy = history[i]
                .grad_log_energy_u
                .ok_or(DiagnosticsError::UndefinedM { index: i })?;
            Ok((dm + d * energy).abs())
        })
        .collect()
}

/// The threshold `M_# = ∫ ln((a - a_min)/a_min)`, or `-∞` when that integral diverges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MSharp {
    pub value: f64,
    pub integrable: bool,
}

impl MSharp {
    pub const NOT_INTEGRABLE: MSharp = MSharp {
        value: f64::NEG_INFINITY,
        integrable: false,
    };
}

/// Nodes (or samples) within this distance of `a_min` count as attaining it.
pub const MINIMUM_MATCH_TOL: f64 = 1e-12;
/// Successive refinements must agree this closely for `M_#` to be finite.
pub const M_SHARP_AGREEMENT: f64 = 1e-3;

/// Point sampler for `a`: the profile when available, else interpolation of the field.
fn sample_a(env: &Environment, point: &[f64]) -> f64 {
    if let Some(p) = env.profile() {
        if let Ok(v) = p.eval(point) {
            return v;
        }
    }
    interpolate(env.field(), point)
}

fn interpolate(field: &ScalarField, point: &[f64]) -> f64 {
    let grid = field.grid();
    let [nx, ny] = grid.nodes();
    let [hx, hy] = grid.spacing();
    let locate = |x: f64, h: f64, n: usize| {
        let s = (x / h).clamp(0.0, (n - 1) as f64);
        let i = (s.floor() as usize).min(n - 2);
        (i, s - i as f64)
    };
    let (i, fx) = locate(point[0], hx, nx);
    let v = field.values();
    if grid.dimension() == 1 {
        return v[i] * (1.0 - fx) + v[i + 1] * fx;
    }
    let (j, fy) = locate(point[1], hy, ny);
    let at = |i: usize, j: usize| v[j * nx + i];
    (at(i, j) * (1.0 - fx) + at(i + 1, j) * fx) * (1.0 - fy)
        + (at(i, j + 1) * (1.0 - fx) + at(i + 1, j + 1) * fx) * fy
}

/// Values of `a` at the centres of the grid cells subdivided `refine` times per axis,
/// laid out row-major, plus the cell measure.
fn refined_midpoints(env: &Environment, refine: usize) -> (Vec<f64>, [usize; 2], f64) {
    let grid = env.grid();
    let [nx, ny] = grid.nodes();
    let [hx, hy] = grid.spacing();
    let cx = (nx - 1) * refine;
    let sx = hx / refine as f64;
    if grid.dimension() == 1 {
        let vals = (0..cx)
            .map(|i| sample_a(env, &[(i as f64 + 0.5) * sx]))
            .collect();
        return (vals, [cx, 1], sx);
    }
    let cy = (ny - 1) * refine;
    let sy = hy / refine as f64;
    let mut vals = Vec::with_capacity(cx * cy);
    for j in 0..cy {
        for i in 0..cx {
            vals.push(sample_a(
                env,
                &[(i as f64 + 0.5) * sx, (j as f64 + 0.5) * sy],
            ));
        }
    }
    (vals, [cx, cy], sx * sy)
}

/// Whether two neighbouring entries of a row-major array both satisfy `hit`.
fn adjacent_hits(vals: &[f64], dims: [usize; 2], hit: impl Fn(f64) -> bool) -> bool {
    let [nx, ny] = dims;
    for j in 0..ny {
        for i in 0..nx {
            let k = j * nx + i;
            if !hit(vals[k]) {
                continue;
            }
            if i + 1 < nx && hit(vals[k + 1]) {
                return true;
            }
            if j + 1 < ny && hit(vals[k + nx]) {
                return true;
            }
        }
    }
    false
}

/// Evaluate `M_#` for a sink-free environment.
///
/// A plateau of the minimum (two adjacent nodes within [`MINIMUM_MATCH_TOL`]
/// of `a_min`) makes the integrand `ln 0` on a set of positive measure, so the
/// result is `-∞`. Otherwise the integral is computed by the midpoint rule on
/// grids refined by `refine`, `2 refine` and `4 refine`; the midpoint rule
/// never samples an isolated minimum at a node. The value is accepted when the
/// last two refinements agree within [`M_SHARP_AGREEMENT`] and the differences
/// are not growing.
pub fn m_sharp(env: &Environment, refine: usize) -> Result<MSharp, DiagnosticsError> {
    let a_min = env.a_min();
    if a_min <= 0.0 {
        return Err(DiagnosticsError::PreconditionSinkPresent { a_min });
    }
    let grid: &Arc<Grid> = env.grid();
    let node_dims = [grid.nodes()[0], grid.nodes()[1]];
    if adjacent_hits(env.field().values(), node_dims, |a| {
        a - a_min <= MINIMUM_MATCH_TOL
    }) {
        return Ok(MSharp::NOT_INTEGRABLE);
    }
    let refine = refine.max(1);
    let levels: Vec<(Vec<f64>, [usize; 2], f64)> = [refine, 2 * refine, 4 * refine]
        .iter()
        .map(|&r| refined_midpoints(env, r))
        .collect();
    // the true minimum may sit between nodes
    let floor = levels
        .iter()
        .flat_map(|(v, _, _)| v.iter().copied())
        .fold(a_min, f64::min);
    let (finest, dims, _) = levels.last().expect("three levels");
    if adjacent_hits(finest, *dims, |a| a - floor <= MINIMUM_MATCH_TOL) {
        return Ok(MSharp::NOT_INTEGRABLE);
    }
    let integrals: Vec<f64> = levels
        .iter()
        .map(|(vals, _, cell)| {
            vals.iter()
                .filter(|&&a| a - floor > 0.0)
                .map(|&a| ((a - floor) / floor).ln() * cell)
                .sum::<f64>()
        })
        .collect();
    let coarse_gap = (integrals[0] - integrals[1]).abs();
    let fine_gap = (integrals[1] - integrals[2]).abs();
    if integrals.iter().all(|v| v.is_finite())
        && fine_gap < M_SHARP_AGREEMENT
        && fine_gap <= coarse_gap
    {
        Ok(MSharp {
            value: integrals[2],
            integrable: true,
        })
    } else {
        Ok(MSharp::NOT_INTEGRABLE)
    }
}

/// Hypotheses on the initial data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialConditionMode {
    /// `{v0 = 0} ⊂ {a <= 0}`, in an environment with sinks.
    SinkExtinction,
    /// `a_min > 0` and `{v0 = 0} ⊂ {a = a_min}`.
    NoSinkFloor,
    /// No-sink floor hypothesis plus `u0 >= a_min` and `v0 <= a - a_min`.
    Ordered,
    /// `a_min > 0`, `u0, v0 > 0` everywhere and `M(0) <= M_#`.
    LyapunovThreshold,
}

impl InitialConditionMode {
    pub fn name(self) -> &'static str {
        match self {
            InitialConditionMode::SinkExtinction => "sink-extinction",
            InitialConditionMode::NoSinkFloor => "no-sink-floor",
            InitialConditionMode::Ordered => "ordered",
            InitialConditionMode::LyapunovThreshold => "lyapunov-threshold",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitialConditionReport {
    pub mode: InitialConditionMode,
    pub passed: bool,
    pub violating_nodes: Vec<usize>,
    pub reason: Option<String>,
    pub m0: Option<f64>,
    pub m_sharp: Option<MSharp>,
}

impl InitialConditionReport {
    fn from_violations(
        mode: InitialConditionMode,
        violating_nodes: Vec<usize>,
        what: &str,
    ) -> Self {
        let passed = violating_nodes.is_empty();
        InitialConditionReport {
            mode,
            passed,
            reason: (!passed).then(|| format!("{} node(s) violate {what}", violating_nodes.len())),
            violating_nodes,
            m0: None,
            m_sharp: None,
        }
    }

    fn failed(mode: InitialConditionMode, reason: String) -> Self {
        InitialConditionReport {
            mode,
            passed: false,
            violating_nodes: Vec::new(),
            reason: Some(reason),
            m0: None,
            m_sharp: None,
        }
    }
}

/// Slack used when comparing initial data against `a_min` and `a - a_min`.
pub const ORDER_TOL: f64 = 1e-12;

/// Refinement factor used for `M_#` inside [`check_initial_conditions`].
pub const M_SHARP_REFINE: usize = 4;

/// Evaluate the hypothesis of `mode` on the grid. Failures are reported, not raised.
pub fn check_initial_conditions(
    u0: &ScalarField,
    v0: &ScalarField,
    env: &Environment,
    mode: InitialConditionMode,
) -> Result<InitialConditionReport, DiagnosticsError> {
    if !u0.same_grid(v0) || !u0.same_grid(env.field()) {
        return Err(GridError::Mismatch.into());
    }
    let a = env.field().values();
    let a_min = env.a_min();
    let (u, v) = (u0.values(), v0.values());
    let zero_set_outside = |allowed: &dyn Fn(f64) -> bool| -> Vec<usize> {
        (0..v.len())
            .filter(|&i| v[i] <= 0.0 && !allowed(a[i]))
            .collect()
    };
    let no_sink = |mode| {
        InitialConditionReport::failed(mode, format!("environment has sinks (a_min = {a_min})"))
    };
    Ok(match mode {
        InitialConditionMode::SinkExtinction => {
            if !env.sink_set_nonempty() {
                return Ok(InitialConditionReport::failed(
                    mode,
                    "environment has no sink: {a <= 0} is empty".into(),
                ));
            }
            let bad = zero_set_outside(&|a| a <= 0.0);
            InitialConditionReport::from_violations(mode, bad, "{v0 = 0} ⊂ {a <= 0}")
        }
        InitialConditionMode::NoSinkFloor => {
            if a_min <= 0.0 {
                return Ok(no_sink(mode));
            }
            let bad = zero_set_outside(&|a| a - a_min <= ORDER_TOL);
            InitialConditionReport::from_violations(mode, bad, "{v0 = 0} ⊂ {a = a_min}")
        }
        InitialConditionMode::Ordered => {
            if a_min <= 0.0 {
                return Ok(no_sink(mode));
            }
            let mut bad = zero_set_outside(&|a| a - a_min <= ORDER_TOL);
            bad.extend(
                (0..u.len())
                    .filter(|&i| u[i] < a_min - ORDER_TOL || v[i] > a[i] - a_min + ORDER_TOL),
            );
            bad.sort_unstable();
            bad.dedup();
            InitialConditionReport::from_violations(
                mode,
                bad,
                "(a_min, a - a_min) ≾ (u0, v0) with {v0 = 0} ⊂ {a = a_min}",
            )
        }
        InitialConditionMode::LyapunovThreshold => {
            if a_min <= 0.0 {
                return Ok(no_sink(mode));
            }
            let bad: Vec<usize> = (0..u.len())
                .filter(|&i| u[i] <= 0.0 || v[i] <= 0.0)
                .collect();
            if !bad.is_empty() {
                return Ok(InitialConditionReport::from_violations(
                    mode,
                    bad,
                    "strict positivity of u0 and v0",
                ));
            }
            let state = SimState::new(u0.clone(), v0.clone()).map_err(|_| GridError::Mismatch)?;
            let m0 = lyapunov_m(&state)?;
            let ms = m_sharp(env, M_SHARP_REFINE)?;
            let passed = m0 <= ms.value;
            InitialConditionReport {
                mode,
                passed,
                violating_nodes: Vec::new(),
                reason: (!passed).then(|| format!("M(0) = {m0} exceeds M_# = {}", ms.value)),
                m0: Some(m0),
                m_sharp: Some(ms),
            }
        }
    })
}

/// `max_x ([a - reference]_+ - v)`: positive where `v` sits below the floor.
pub fn floor_check(
    state: &SimState,
    env: &Environment,
    reference: &ScalarField,
) -> Result<f64, DiagnosticsError> {
    let floor = env
        .field()
        .zip_map(reference, |a, r| a - r)?
        .positive_part();
    Ok(floor.zip_map(&state.v, |f, v| f - v)?.max_value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envdsl::parse;

    fn env(src: &str, n: usize) -> Environment {
        let g = Grid::new_1d(1.0, n).unwrap();
        Environment::new(parse(src, 1).unwrap(), &g).unwrap()
    }

    fn state(e: &Environment, u: &str, v: &str) -> SimState {
        let g = e.grid();
        let f = |s: &str| crate::grid::sample(&parse(s, 1).unwrap(), g).unwrap();
        SimState::new(f(u), f(v)).unwrap()
    }

    #[test]
    fn lyapunov_values() {
        let e = env("1", 33);
        assert_eq!(lyapunov_m(&state(&e, "0.3 + x", "0.3 + x")).unwrap(), 0.0);
        assert!((lyapunov_m(&state(&e, "1", "e")).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            lyapunov_m(&state(&e, "1", "x")),
            Err(DiagnosticsError::NonPositiveField {
                species: "v",
                index: 0,
                ..
            })
        ));
    }

    #[test]
    fn record_flags_undefined_quantities() {
        let e = env("1 + x", 17);
        let s = state(&e, "0.5", "max(0, x - 0.5)");
        let r = DiagnosticsRecord::from_state(&s, &e, None);
        assert_eq!(r.lyapunov_m, None);
        assert_eq!(r.grad_log_energy_u, Some(0.0));
        assert_eq!(r.floor_violation, None);
        assert!((r.bound_excess - (0.5f64 - 2.0)).abs() < 1e-15);
        let row = r.csv_row();
        assert_eq!(row.split(',').count(), 9);
        assert!(row.contains(",,"));
    }

    #[test]
    fn residual_vanishes_for_uniform_u() {
        let records: Vec<DiagnosticsRecord> = (0..5)
            .map(|i| DiagnosticsRecord {
                t: i as f64 * 0.5,
                sup_norm_u: 1.0,
                sup_norm_v: 1.0,
                min_u: 1.0,
                min_v: 1.0,
                lyapunov_m: Some(-0.25),
                grad_log_energy_u: Some(0.0),
                floor_violation: None,
                bound_excess: 0.0,
            })
            .collect();
        assert_eq!(lyapunov_residual(&records, 0.1).unwrap(), vec![0.0; 3]);
        let mut gap = records.clone();
        gap[2].lyapunov_m = None;
        assert!(matches!(
            lyapunov_residual(&gap, 0.1),
            Err(DiagnosticsError::UndefinedM { .. })
        ));
        let mut skew = records;
        skew[3].t += 0.1;
        assert!(matches!(
            lyapunov_residual(&skew, 0.1),
            Err(DiagnosticsError::NonUniformSpacing { .. })
        ));
    }

    #[test]
    fn m_sharp_cases() {
        assert_eq!(m_sharp(&env("2", 65), 4).unwrap(), MSharp::NOT_INTEGRABLE);
        assert_eq!(
            m_sharp(&env("1 + max(0, x - 0.5)", 65), 4).unwrap(),
            MSharp::NOT_INTEGRABLE
        );
        let linear = m_sharp(&env("1 + x", 257), 4).unwrap();
        assert!(linear.integrable);
        assert!((linear.value + 1.0).abs() < 1e-3, "{}", linear.value);
        assert!(matches!(
            m_sharp(&env("x - 0.5", 33), 4),
            Err(DiagnosticsError::PreconditionSinkPresent { .. })
        ));
    }

    #[test]
    fn m_sharp_without_profile_interpolates() {
        let e = env("1 + x", 257);
        let bare = Environment::from_field(e.field().clone());
        let m = m_sharp(&bare, 4).unwrap();
        assert!(m.integrable);
        assert!((m.value + 1.0).abs() < 1e-3);
    }

    #[test]
    fn initial_condition_modes() {
        let sinky = env("0.5 + cos(2*pi*x)", 129);
        let r = check_initial_conditions(
            &ScalarField::constant(sinky.grid().clone(), 0.3),
            &ScalarField::constant(sinky.grid().clone(), 0.3),
            &sinky,
            InitialConditionMode::SinkExtinction,
        )
        .unwrap();
        assert!(r.passed);

        let s = state(&sinky, "0.3", "max(0, x - 0.5)");
        let r = check_initial_conditions(&s.u, &s.v, &sinky, InitialConditionMode::SinkExtinction)
            .unwrap();
        assert!(!r.passed);
        // x <= 0.5 with a > 0 there: nodes 0..=42 roughly
        assert!(r.violating_nodes.contains(&0));
        assert!(!r.violating_nodes.contains(&100));

        let pos = env("1 + 0.5*cos(pi*x)", 129);
        let s = state(&pos, "0.5", "0.5*cos(pi*x) + 0.5");
        let r = check_initial_conditions(&s.u, &s.v, &pos, InitialConditionMode::Ordered).unwrap();
        assert!(r.passed, "{r:?}");
        let s = state(&pos, "0.5", "0.5*cos(pi*x) + 0.6");
        let r = check_initial_conditions(&s.u, &s.v, &pos, InitialConditionMode::Ordered).unwrap();
        assert!(!r.passed);
        let r =
            check_initial_conditions(&s.u, &s.v, &pos, InitialConditionMode::NoSinkFloor).unwrap();
        assert!(r.passed);
        let r = check_initial_conditions(&s.u, &s.v, &sinky, InitialConditionMode::NoSinkFloor)
            .unwrap();
        assert!(!r.passed);

        let s = state(&pos, "0.5", "0.2");
        let r = check_initial_conditions(&s.u, &s.v, &pos, InitialConditionMode::LyapunovThreshold)
            .unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.m0.unwrap() < r.m_sharp.unwrap().value);
        let s = state(&pos, "0.5", "0.4");
        let r = check_initial_conditions(&s.u, &s.v, &pos, InitialConditionMode::LyapunovThreshold)
            .unwrap();
        assert!(!r.passed);
    }

    #[test]
    fn floors() {
        let e = env("0.5 + cos(2*pi*x)", 65);
        let zero = ScalarField::zeros(e.grid().clone());
        let above = SimState::new(zero.clone(), e.field().map(|a| a.max(0.0) + 0.1)).unwrap();
        assert!(floor_check(&above, &e, &zero).unwrap() <= 0.0);
        let at = SimState::new(zero.clone(), e.field().positive_part()).unwrap();
        assert_eq!(floor_check(&at, &e, &zero).unwrap(), 0.0);
    }
}
