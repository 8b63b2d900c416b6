//! Simulation driver and per-check evaluation for [`run_scenario`](super::run_scenario).

use std::collections::VecDeque;
use std::io::Write;
use std::path::PathBuf;

use super::{
    create, field_file_name, io_err, write_state_csv, CheckKind, CheckSpec, Comparator,
    FinalSummary, Measurement, RunReport, RunnerError, Scenario, Setup, Verdict,
};
use crate::diagnostics::{
    check_initial_conditions, floor_check, lyapunov_residual, write_diagnostics_csv,
    DiagnosticsRecord, InitialConditionMode, InitialConditionReport,
};
use crate::grid::{Environment, ScalarField};
use crate::steady::{
    cascade, omega_star_nonempty, solve_logistic_steady, steady_integral_identity, SteadyError,
    SteadySolveConfig, MONOTONE_SLACK,
};
use crate::stepper::{
    picard_mild_solve, RunOutcome, SchemeConfig, SimState, StepError, Stepper, StopCriteria,
};

/// Iteration cap handed to the Picard oracle.
const ORACLE_ITERATIONS: usize = 100;

fn hypothesis(kind: CheckKind) -> Option<InitialConditionMode> {
    match kind {
        CheckKind::SinkExtinction => Some(InitialConditionMode::SinkExtinction),
        CheckKind::FloorAmin => Some(InitialConditionMode::NoSinkFloor),
        CheckKind::OrderedCoexistence => Some(InitialConditionMode::Ordered),
        CheckKind::LyapunovThreshold => Some(InitialConditionMode::LyapunovThreshold),
        _ => None,
    }
}

pub(super) fn initial_reports(
    sc: &Scenario,
    s: &Setup,
) -> Result<Vec<InitialConditionReport>, RunnerError> {
    let mut modes: Vec<InitialConditionMode> = sc
        .checks
        .iter()
        .filter_map(|c| hypothesis(c.kind))
        .collect();
    modes.dedup();
    modes
        .into_iter()
        .map(|mode| {
            check_initial_conditions(&s.u0, &s.v0, &s.env, mode).map_err(|source| {
                RunnerError::Diagnostics {
                    scenario: sc.name.clone(),
                    source,
                }
            })
        })
        .collect()
}

/// Streaming evaluation of the dissipation identity on consecutive steps.
struct LyapunovTracker {
    d: f64,
    window_end: f64,
    last: VecDeque<DiagnosticsRecord>,
    max_scaled: f64,
    max_residual_window: f64,
    max_increase_rate: f64,
    undefined_at: Option<f64>,
}

impl LyapunovTracker {
    fn new(d: f64, window_end: f64) -> Self {
        LyapunovTracker {
            d,
            window_end,
            last: VecDeque::with_capacity(3),
            max_scaled: 0.0,
            max_residual_window: 0.0,
            max_increase_rate: f64::NEG_INFINITY,
            undefined_at: None,
        }
    }

    fn push(&mut self, rec: DiagnosticsRecord) {
        if self.undefined_at.is_some() {
            return;
        }
        let (Some(m), Some(_)) = (rec.lyapunov_m, rec.grad_log_energy_u) else {
            self.undefined_at = Some(rec.t);
            return;
        };
        if let Some(prev) = self.last.back() {
            let rate = (m - prev.lyapunov_m.unwrap_or(m)) / (rec.t - prev.t);
            self.max_increase_rate = self.max_increase_rate.max(rate);
        }
        if self.last.len() == 3 {
            self.last.pop_front();
        }
        self.last.push_back(rec);
        if self.last.len() == 3 {
            let window: Vec<DiagnosticsRecord> = self.last.iter().cloned().collect();
            if let Ok(r) = lyapunov_residual(&window, self.d) {
                let mid = &window[1];
                let energy = mid.grad_log_energy_u.unwrap_or(0.0);
                self.max_scaled = self.max_scaled.max(r[0] / (1.0 + self.d * energy));
                if mid.t <= self.window_end {
                    self.max_residual_window = self.max_residual_window.max(r[0]);
                }
            }
        }
    }
}

struct SimOutput {
    records: Vec<DiagnosticsRecord>,
    last: SimState,
    outcome: RunOutcome,
    lyapunov: Option<LyapunovTracker>,
    files: Vec<PathBuf>,
}

fn step_err(sc: &Scenario) -> impl Fn(StepError) -> RunnerError + '_ {
    move |source| RunnerError::Step {
        scenario: sc.name.clone(),
        source,
    }
}

fn steady_err(sc: &Scenario) -> impl Fn(SteadyError) -> RunnerError + '_ {
    move |source| RunnerError::Steady {
        scenario: sc.name.clone(),
        source,
    }
}

fn floor_reference(
    sc: &Scenario,
    env: &Environment,
    ustar: Option<&ScalarField>,
) -> Option<ScalarField> {
    let grid = env.grid().clone();
    if sc.has_check(CheckKind::FloorUstar) {
        ustar.cloned()
    } else if sc.has_check(CheckKind::FloorAmin) {
        Some(ScalarField::constant(grid, env.a_min()))
    } else if sc.has_check(CheckKind::SinkExtinction) {
        Some(ScalarField::zeros(grid))
    } else {
        None
    }
}

fn simulate(
    sc: &Scenario,
    s: &Setup,
    ustar: Option<&ScalarField>,
) -> Result<SimOutput, RunnerError> {
    let state = SimState::new(s.u0.clone(), s.v0.clone()).map_err(step_err(sc))?;
    let positive = s.u0.min_value() > 0.0 && s.v0.min_value() > 0.0;
    let mut tracker = (sc.has_check(CheckKind::LyapunovIdentity) && positive)
        .then(|| LyapunovTracker::new(sc.d, sc.params.lyapunov_refine_horizon));
    let stepper = Stepper::new(&s.env, sc.scheme()).map_err(step_err(sc))?;
    let stop = StopCriteria {
        t_max: sc.t_max,
        settle_tol: sc.settle_tol,
        settle_window: 1.0,
        snapshot_every: if tracker.is_some() {
            sc.dt
        } else {
            sc.snapshot_every
        },
    };
    let snap_steps = ((sc.snapshot_every / sc.dt).round() as u64).max(1);
    let reference = floor_reference(sc, &s.env, ustar);
    let mut records = Vec::new();
    let mut files = Vec::new();
    let mut io_failure = None;
    let mut write_field = |st: &SimState, files: &mut Vec<PathBuf>| {
        let path = sc.out_dir.join(field_file_name(st.t));
        let result = create(&path).and_then(|mut w| {
            write_state_csv(st, &mut w)
                .and_then(|_| w.flush())
                .map_err(io_err(&path))
        });
        match result {
            Ok(()) => files.push(path),
            Err(e) => {
                io_failure.get_or_insert(e);
            }
        }
    };
    let (last, outcome) = stepper
        .run(state, &stop, |st| {
            if let Some(tr) = tracker.as_mut() {
                tr.push(DiagnosticsRecord::from_state(st, &s.env, None));
            }
            let n = (st.t / sc.dt).round() as u64;
            if n.is_multiple_of(snap_steps) {
                if records.len() % sc.field_every == 0 {
                    write_field(st, &mut files);
                }
                records.push(DiagnosticsRecord::from_state(
                    st,
                    &s.env,
                    reference.as_ref(),
                ));
            }
        })
        .map_err(step_err(sc))?;
    if records.last().map(|r| r.t) != Some(last.t) {
        records.push(DiagnosticsRecord::from_state(
            &last,
            &s.env,
            reference.as_ref(),
        ));
    }
    let final_name = sc.out_dir.join(field_file_name(last.t));
    if !files.contains(&final_name) {
        write_field(&last, &mut files);
    }
    if let Some(e) = io_failure {
        return Err(e);
    }
    let path = sc.out_dir.join("diagnostics.csv");
    let mut w = create(&path)?;
    write_diagnostics_csv(&records, &mut w)
        .and_then(|_| w.flush())
        .map_err(io_err(&path))?;
    files.push(path);
    Ok(SimOutput {
        records,
        last,
        outcome,
        lyapunov: tracker,
        files,
    })
}

/// Max identity residual over `[0, horizon]` for a copy of the scenario at
/// half the step and twice the resolution.
fn refined_lyapunov_residual(sc: &Scenario, horizon: f64) -> Result<f64, RunnerError> {
    let mut fine = sc.clone();
    fine.dt = sc.dt / 2.0;
    fine.nodes = [2 * sc.nodes[0] - 1, 2 * sc.nodes[1] - 1];
    let s = super::setup(&fine)?;
    let stepper = Stepper::new(&s.env, fine.scheme()).map_err(step_err(sc))?;
    let stop = StopCriteria {
        t_max: horizon,
        settle_tol: 0.0,
        settle_window: 1.0,
        snapshot_every: fine.dt,
    };
    let mut tracker = LyapunovTracker::new(sc.d, horizon);
    let state = SimState::new(s.u0, s.v0).map_err(step_err(sc))?;
    stepper
        .run(state, &stop, |st| {
            tracker.push(DiagnosticsRecord::from_state(st, &s.env, None))
        })
        .map_err(step_err(sc))?;
    Ok(tracker.max_residual_window)
}

/// Sup distance between one Strang run to `horizon` and `reference`.
fn strang_gap(
    s: &Setup,
    scheme: SchemeConfig,
    dt: f64,
    horizon: f64,
    reference: &SimState,
) -> Result<f64, StepError> {
    let steps = (horizon / dt).round().max(1.0) as usize;
    let stepper = Stepper::new(
        &s.env,
        SchemeConfig {
            dt: horizon / steps as f64,
            ..scheme
        },
    )?;
    let mut state = SimState::new(s.u0.clone(), s.v0.clone())?;
    for _ in 0..steps {
        stepper.step_in_place(&mut state)?;
    }
    Ok(state
        .u
        .sup_diff(&reference.u)?
        .max(state.v.sup_diff(&reference.v)?))
}

fn field_distance(f: &ScalarField, target: &ScalarField) -> f64 {
    f.sup_diff(target).unwrap_or(f64::INFINITY)
}

pub(super) fn evaluate(sc: &Scenario, s: &Setup) -> Result<RunReport, RunnerError> {
    let init = initial_reports(sc, s)?;
    let steady_cfg = SteadySolveConfig {
        dt: sc.dt,
        ..SteadySolveConfig::default()
    };
    let ustar = if sc.has_check(CheckKind::FloorUstar) || sc.has_check(CheckKind::SteadyIdentity) {
        Some(solve_logistic_steady(s.env.field(), sc.d, &steady_cfg).map_err(steady_err(sc))?)
    } else {
        None
    };
    let sim = if sc.checks.iter().any(|c| c.kind.needs_simulation()) {
        Some(simulate(sc, s, ustar.as_ref())?)
    } else {
        None
    };
    let mut files = sim.as_ref().map(|o| o.files.clone()).unwrap_or_default();
    let mut verdicts = Vec::new();
    for spec in &sc.checks {
        let hyp = hypothesis(spec.kind).and_then(|m| init.iter().find(|r| r.mode == m));
        if let Some(r) = hyp.filter(|r| !r.passed) {
            let reason = r.reason.clone().unwrap_or_default();
            verdicts.push(Verdict::skipped(
                spec.kind,
                format!(
                    "initial data outside the {} hypothesis: {reason}",
                    r.mode.name()
                ),
            ));
            continue;
        }
        let ctx = Ctx {
            sc,
            s,
            sim: sim.as_ref(),
            ustar: ustar.as_ref(),
            steady_cfg: &steady_cfg,
        };
        verdicts.push(ctx.verdict(spec, hyp, &mut files)?);
    }
    let final_state = sim.as_ref().map(|o| FinalSummary {
        t: o.last.t,
        settled: o.outcome.settled(),
        rate: match o.outcome {
            RunOutcome::Settled { rate } => Some(rate),
            RunOutcome::Horizon { rate } => rate,
        },
        sup_u: o.last.u.sup_norm(),
        sup_v: o.last.v.sup_norm(),
        min_u: o.last.u.min_value(),
        min_v: o.last.v.min_value(),
    });
    Ok(RunReport {
        scenario: sc.name.clone(),
        verdicts,
        initial_conditions: init,
        wall_time_s: 0.0,
        final_state,
        files,
    })
}

struct Ctx<'a> {
    sc: &'a Scenario,
    s: &'a Setup,
    sim: Option<&'a SimOutput>,
    ustar: Option<&'a ScalarField>,
    steady_cfg: &'a SteadySolveConfig,
}

impl Ctx<'_> {
    fn sim(&self) -> &SimOutput {
        self.sim
            .expect("simulation runs whenever a trajectory check is requested")
    }

    fn ustar(&self) -> &ScalarField {
        self.ustar.expect("u* is solved whenever a check needs it")
    }

    /// Records with `t` past `after`; the settled final record stands in for
    /// later times when the run stopped early.
    fn records_after(&self, after: f64, inclusive: bool) -> Option<Vec<&DiagnosticsRecord>> {
        let sim = self.sim();
        let late: Vec<&DiagnosticsRecord> = sim
            .records
            .iter()
            .filter(|r| if inclusive { r.t >= after } else { r.t > after })
            .collect();
        if !late.is_empty() {
            Some(late)
        } else if sim.outcome.settled() {
            sim.records.last().map(|r| vec![r])
        } else {
            None
        }
    }

    fn verdict(
        &self,
        spec: &CheckSpec,
        hyp: Option<&InitialConditionReport>,
        files: &mut Vec<PathBuf>,
    ) -> Result<Verdict, RunnerError> {
        let (sc, s) = (self.sc, self.s);
        let tol = spec.tolerance();
        let p = &sc.params;
        let kind = spec.kind;
        let env = &s.env;
        Ok(match kind {
            CheckKind::GlobalBound => match self.records_after(p.bound_after, true) {
                None => Verdict::skipped(kind, format!("run ended before t = {}", p.bound_after)),
                Some(late) => {
                    let excess = late
                        .iter()
                        .map(|r| r.bound_excess)
                        .fold(f64::NEG_INFINITY, f64::max);
                    Verdict::from_measurements(
                        kind,
                        vec![Measurement::new(
                            "max_bound_excess",
                            excess,
                            Comparator::AtMost,
                            tol,
                        )],
                    )
                }
            },
            CheckKind::SinkExtinction => {
                let last = &self.sim().last;
                let a_plus = env.field().positive_part();
                let zero = ScalarField::zeros(env.grid().clone());
                let deficit =
                    floor_check(last, env, &zero).map_err(|source| RunnerError::Diagnostics {
                        scenario: sc.name.clone(),
                        source,
                    })?;
                let excess = last
                    .v
                    .zip_map(&a_plus, |v, f| v - f)
                    .map(|f| f.max_value())
                    .unwrap_or(f64::INFINITY);
                let sup_u =
                    Measurement::new("final_sup_u", last.u.sup_norm(), Comparator::Below, tol);
                if sc.epsilon_v > 0.0 {
                    Verdict::from_measurements(kind, vec![sup_u]).with_note(
                        "v diffuses (epsilon_v > 0): the (0, a_+) floors are not checked",
                    )
                } else {
                    Verdict::from_measurements(
                        kind,
                        vec![
                            sup_u,
                            Measurement::new(
                                "max_floor_deficit",
                                deficit.max(0.0),
                                Comparator::Below,
                                p.floor_tol,
                            ),
                            Measurement::new(
                                "max_floor_excess",
                                excess.max(0.0),
                                Comparator::Below,
                                p.floor_tol,
                            ),
                        ],
                    )
                }
            }
            CheckKind::FloorUstar => {
                let ustar = self.ustar();
                let uncovered =
                    s.v0.values()
                        .iter()
                        .zip(env.field().values().iter().zip(ustar.values()))
                        .position(|(&v, (&a, &u))| a > u && v <= 0.0);
                if let Some(i) = uncovered {
                    Verdict::skipped(kind, format!("v0 vanishes at node {i} where a > u*"))
                } else {
                    let value = floor_check(&self.sim().last, env, ustar).map_err(|source| {
                        RunnerError::Diagnostics {
                            scenario: sc.name.clone(),
                            source,
                        }
                    })?;
                    Verdict::from_measurements(
                        kind,
                        vec![Measurement::new(
                            "floor_violation",
                            value,
                            Comparator::AtMost,
                            tol,
                        )],
                    )
                }
            }
            CheckKind::FloorAmin => {
                let reference = ScalarField::constant(env.grid().clone(), env.a_min());
                let value = floor_check(&self.sim().last, env, &reference).map_err(|source| {
                    RunnerError::Diagnostics {
                        scenario: sc.name.clone(),
                        source,
                    }
                })?;
                Verdict::from_measurements(
                    kind,
                    vec![Measurement::new(
                        "floor_violation",
                        value,
                        Comparator::AtMost,
                        tol,
                    )],
                )
            }
            CheckKind::LyapunovIdentity => self.lyapunov_identity(tol)?,
            CheckKind::LyapunovThreshold => match self.records_after(p.threshold_after, false) {
                None => {
                    Verdict::skipped(kind, format!("run ended before t = {}", p.threshold_after))
                }
                Some(late) => {
                    let best = late.iter().map(|r| r.sup_norm_u).fold(0.0, f64::max);
                    let note = hyp
                        .and_then(|h| Some(format!("M(0) = {}, M_# = {}", h.m0?, h.m_sharp?.value)))
                        .unwrap_or_default();
                    Verdict::from_measurements(
                        kind,
                        vec![Measurement::new(
                            "max_sup_u_after",
                            best,
                            Comparator::AtLeast,
                            env.a_min() - tol,
                        )],
                    )
                    .with_note(note)
                }
            },
            CheckKind::ContinuumSteady => {
                let stepper = Stepper::new(env, sc.scheme()).map_err(step_err(sc))?;
                let steps = ((1.0 / sc.dt).round() as usize).max(1);
                let start = SimState::new(s.u0.clone(), s.v0.clone()).map_err(step_err(sc))?;
                let mut state = start.clone();
                for _ in 0..steps {
                    stepper.step_in_place(&mut state).map_err(step_err(sc))?;
                }
                let elapsed = steps as f64 * sc.dt;
                let drift = field_distance(&state.u, &start.u)
                    .max(field_distance(&state.v, &start.v))
                    / elapsed;
                Verdict::from_measurements(
                    kind,
                    vec![Measurement::new(
                        "drift_per_unit_time",
                        drift,
                        Comparator::AtMost,
                        tol,
                    )],
                )
            }
            CheckKind::OrderedCoexistence => {
                let last = &self.sim().last;
                let a_min = env.a_min();
                let u_target = ScalarField::constant(env.grid().clone(), a_min);
                let v_target = env.field().map(|a| a - a_min);
                let dist =
                    field_distance(&last.u, &u_target).max(field_distance(&last.v, &v_target));
                Verdict::from_measurements(
                    kind,
                    vec![Measurement::new(
                        "final_distance",
                        dist,
                        Comparator::Below,
                        tol,
                    )],
                )
            }
            CheckKind::CascadeLimit => {
                let cfg = SteadySolveConfig {
                    cascade_tol: tol,
                    ..*self.steady_cfg
                };
                match cascade(env, sc.d, p.k_max, &cfg) {
                    Err(SteadyError::CascadeAssumptionViolated) => {
                        Verdict::skipped(kind, "the logistic steady state of a is zero")
                    }
                    Err(e) => return Err(steady_err(sc)(e)),
                    Ok(c) => {
                        let path = sc.out_dir.join("cascade.csv");
                        let mut w = create(&path)?;
                        c.write_csv(&mut w)
                            .and_then(|_| w.flush())
                            .map_err(io_err(&path))?;
                        files.push(path);
                        let dists = c.distances_to_limit();
                        let reached = dists.iter().position(|&d| d < tol);
                        let stages = c.iterates.len() - 1;
                        let note = match reached {
                            Some(k) => format!("within tolerance at stage {k}"),
                            None => format!("not within tolerance after {stages} stages"),
                        };
                        Verdict::from_measurements(
                            kind,
                            vec![
                                Measurement::new(
                                    "monotonicity_violation",
                                    c.monotonicity_violation().max(0.0),
                                    Comparator::AtMost,
                                    MONOTONE_SLACK,
                                ),
                                Measurement::new(
                                    "final_distance",
                                    *dists.last().expect("nonempty cascade"),
                                    Comparator::Below,
                                    tol,
                                ),
                            ],
                        )
                        .with_note(note)
                    }
                }
            }
            CheckKind::OracleAgreement => {
                if sc.epsilon_v != 0.0 {
                    return Ok(Verdict::skipped(
                        kind,
                        "the oracle covers the hybrid system only (epsilon_v = 0)",
                    ));
                }
                let horizon = p.oracle_horizon;
                let oracle = picard_mild_solve(&s.u0, &s.v0, env, sc.d, horizon, ORACLE_ITERATIONS)
                    .map_err(step_err(sc))?;
                let scheme = sc.scheme();
                let gap = |dt| strang_gap(s, scheme, dt, horizon, &oracle).map_err(step_err(sc));
                let coarse = gap(p.oracle_dts[0])?;
                let fine = gap(p.oracle_dts[1])?;
                let finest = gap(p.oracle_fine_dt)?;
                let ratio = if fine > 0.0 {
                    coarse / fine
                } else {
                    f64::INFINITY
                };
                Verdict::from_measurements(
                    kind,
                    vec![
                        Measurement::new("gap_ratio", ratio, Comparator::AtLeast, p.oracle_ratio),
                        Measurement::new("fine_gap", finest, Comparator::AtMost, tol),
                    ],
                )
                .with_note(format!(
                    "gaps: {coarse:e} at dt = {}, {fine:e} at dt = {}",
                    p.oracle_dts[0], p.oracle_dts[1]
                ))
            }
            CheckKind::SteadyIdentity => {
                let ustar = self.ustar();
                let identity = steady_integral_identity(ustar, env.field())
                    .map_err(|source| RunnerError::Setup {
                        scenario: sc.name.clone(),
                        source,
                    })?
                    .abs();
                let mut ms = vec![Measurement::new(
                    "integral_identity",
                    identity,
                    Comparator::AtMost,
                    tol,
                )];
                let a = env.field();
                let nonconstant = a.max_value() - a.min_value() > 1e-12;
                if nonconstant && ustar.sup_norm() > 0.0 {
                    ms.push(Measurement::new(
                        "max_ustar",
                        ustar.max_value(),
                        Comparator::AtMost,
                        env.a_sup() - p.strict_bound_margin,
                    ));
                    let nonempty = omega_star_nonempty(ustar, a).unwrap_or(false);
                    ms.push(Measurement::new(
                        "omega_star_nonempty",
                        if nonempty { 1.0 } else { 0.0 },
                        Comparator::AtLeast,
                        1.0,
                    ));
                }
                Verdict::from_measurements(kind, ms)
            }
        })
    }

    fn lyapunov_identity(&self, tol: f64) -> Result<Verdict, RunnerError> {
        let kind = CheckKind::LyapunovIdentity;
        let sc = self.sc;
        let Some(tr) = self.sim().lyapunov.as_ref() else {
            return Ok(Verdict::skipped(
                kind,
                "u0 and v0 must be strictly positive",
            ));
        };
        if let Some(t) = tr.undefined_at {
            let mut v = Verdict::from_measurements(kind, Vec::new());
            v.status = super::Status::Fail;
            return Ok(v.with_note(format!("M became undefined at t = {t}")));
        }
        let mut ms = vec![
            Measurement::new(
                "max_scaled_residual",
                tr.max_scaled,
                Comparator::AtMost,
                tol,
            ),
            Measurement::new(
                "max_m_increase_rate",
                tr.max_increase_rate.max(0.0),
                Comparator::AtMost,
                tol,
            ),
        ];
        let mut note = None;
        if sc.params.lyapunov_refine {
            let horizon = sc.params.lyapunov_refine_horizon.min(sc.t_max);
            let fine = refined_lyapunov_residual(sc, horizon)?;
            let coarse = tr.max_residual_window;
            if coarse > 1e-14 {
                let ratio = if fine > 0.0 {
                    coarse / fine
                } else {
                    f64::INFINITY
                };
                ms.push(Measurement::new(
                    "refinement_ratio",
                    ratio,
                    Comparator::AtLeast,
                    sc.params.lyapunov_ratio,
                ));
                note = Some(format!(
                    "max residual on [0, {horizon}]: {coarse:e}, refined {fine:e}"
                ));
            } else {
                note = Some("residual at rounding level; refinement ratio not meaningful".into());
            }
        }
        let v = Verdict::from_measurements(kind, ms);
        Ok(match note {
            Some(n) => v.with_note(n),
            None => v,
        })
    }
}
