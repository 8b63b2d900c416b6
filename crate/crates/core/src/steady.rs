//! Logistic steady states and the cascade of steady states with truncated
//! growth rates.
//!
//! The single-species equation `u_t = d Δu + u (g - u)` has a unique
//! nonnegative attractor: either the zero state or a strictly positive steady
//! state. It is found here by marching the v-free stepper from above, then
//! polishing with Newton's method on the discrete elliptic equation. Because
//! the positive solution is unique, any strictly positive Newton root is the
//! attractor.
//!
//! The cascade starts from `u*_0 = u*` and solves for `u*_{k+1}` with growth
//! `a - [a - u*_k]_+`; the iterates decrease pointwise towards `[a_min]_+`.

use std::io::{self, Write};
use std::sync::Arc;

use thiserror::Error;

use crate::grid::{Environment, Grid, GridError, ScalarField};
use crate::linops::{NeumannLaplacian, Tridiagonal};
use crate::stepper::{SchemeConfig, SimState, StepError, Stepper};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SteadyError {
    #[error(
        "steady solve did not settle by t = {t_max} (last change rate {rate:e} per unit time)"
    )]
    NotSettled { t_max: f64, rate: f64 },
    #[error("settled state has elliptic residual {residual:e}, above {tolerance:e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },
    #[error("the logistic steady state of a is zero; the cascade needs a positive u*")]
    CascadeAssumptionViolated,
    #[error("invalid steady-state configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Step(#[from] StepError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Elliptic residual bound every returned positive state satisfies.
pub const RESIDUAL_TOL: f64 = 1e-6;
/// Slack allowed in the pointwise monotonicity of the cascade.
pub const MONOTONE_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadySolveConfig {
    /// Settled once the sup-norm change per unit time falls below this.
    pub settle_tol: f64,
    pub t_max: f64,
    /// A settled state with sup norm below this is the zero attractor.
    pub extinction_tol: f64,
    /// Time step of the marching phase.
    pub dt: f64,
    /// The cascade stops once within this sup distance of `[a_min]_+`.
    pub cascade_tol: f64,
}

impl Default for SteadySolveConfig {
    fn default() -> Self {
        SteadySolveConfig {
            settle_tol: 1e-9,
            t_max: 1e4,
            extinction_tol: 1e-8,
            dt: 0.01,
            cascade_tol: 1e-3,
        }
    }
}

impl SteadySolveConfig {
    fn validate(&self) -> Result<(), SteadyError> {
        for (name, v) in [
            ("settle_tol", self.settle_tol),
            ("t_max", self.t_max),
            ("extinction_tol", self.extinction_tol),
            ("dt", self.dt),
            ("cascade_tol", self.cascade_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(SteadyError::InvalidConfig(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// `d L u + u (g - u)`.
pub fn logistic_residual(
    u: &ScalarField,
    growth: &ScalarField,
    d: f64,
) -> Result<ScalarField, GridError> {
    if !u.same_grid(growth) {
        return Err(GridError::Mismatch);
    }
    let lap = NeumannLaplacian::new(u.grid());
    let mut out = vec![0.0; u.len()];
    lap.apply_into(u.values(), &mut out);
    for ((r, &uu), &g) in out.iter_mut().zip(u.values()).zip(growth.values()) {
        *r = d * *r + uu * (g - uu);
    }
    Ok(ScalarField::from_raw(u.grid().clone(), out))
}

/// Newton's method on `d L u + u (g - u) = 0` from `start`.
///
/// Returns the root only when it is strictly positive and the residual is
/// within [`RESIDUAL_TOL`].
fn newton_polish(start: &ScalarField, growth: &ScalarField, d: f64) -> Option<ScalarField> {
    let grid = start.grid().clone();
    let mut u = start.clone();
    for _ in 0..50 {
        let f = logistic_residual(&u, growth, d).ok()?;
        if !f.sup_norm().is_finite() {
            return None;
        }
        // diagonal of the Jacobian: g - 2u
        let q: Vec<f64> = growth
            .values()
            .iter()
            .zip(u.values())
            .map(|(&g, &uu)| g - 2.0 * uu)
            .collect();
        let step = jacobian_solve(&grid, d, &q, f.values())?;
        let mut next = u.clone();
        for (x, s) in next.values_mut().iter_mut().zip(&step) {
            *x -= s;
        }
        if next.min_value() <= 0.0 || !next.all_finite() {
            return None;
        }
        let moved = step.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        u = next;
        if moved <= 1e-12 * u.sup_norm() {
            let f = logistic_residual(&u, growth, d).ok()?;
            return (f.sup_norm() <= RESIDUAL_TOL).then_some(u);
        }
    }
    None
}

/// Solve `(d L + diag(q)) x = rhs`.
fn jacobian_solve(grid: &Arc<Grid>, d: f64, q: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    if grid.dimension() == 1 {
        let n = grid.len();
        let r = d / grid.spacing()[0].powi(2);
        let mut lower = vec![r; n];
        let mut upper = vec![r; n];
        let diag: Vec<f64> = q.iter().map(|&qq| qq - 2.0 * r).collect();
        upper[0] = 2.0 * r;
        lower[n - 1] = 2.0 * r;
        lower[0] = 0.0;
        upper[n - 1] = 0.0;
        let t = Tridiagonal::factor(lower, diag, upper)?;
        let mut x = rhs.to_vec();
        t.solve_in_place(&mut x);
        x.iter().all(|v| v.is_finite()).then_some(x)
    } else {
        conjugate_gradient(grid, d, q, rhs)
    }
}

/// CG on the weighted, negated system `-W (d L + diag q) x = -W rhs`, which
/// is symmetric and, at a stable steady state, positive definite.
fn conjugate_gradient(grid: &Arc<Grid>, d: f64, q: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let w = grid.weights();
    let lap = NeumannLaplacian::new(grid);
    let n = grid.len();
    let mut tmp = vec![0.0; n];
    let apply = |x: &[f64], out: &mut [f64], tmp: &mut Vec<f64>| {
        lap.apply_into(x, tmp);
        for i in 0..n {
            out[i] = -w[i] * (d * tmp[i] + q[i] * x[i]);
        }
    };
    let b: Vec<f64> = (0..n).map(|i| -w[i] * rhs[i]).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut x = vec![0.0; n];
    let mut r = b.clone();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let target = 1e-28 * dot(&b, &b).max(f64::MIN_POSITIVE);
    for _ in 0..(10 * n) {
        if rr <= target {
            return Some(x);
        }
        apply(&p, &mut ap, &mut tmp);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return None;
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    (rr <= 1e-20 * dot(&b, &b)).then_some(x)
}

/// Steady state of `u_t = d Δu + u (g - u)` marched from `start`.
pub fn solve_logistic_steady_from(
    growth: &ScalarField,
    d: f64,
    cfg: &SteadySolveConfig,
    start: ScalarField,
) -> Result<ScalarField, SteadyError> {
    cfg.validate()?;
    let grid = growth.grid().clone();
    let stepper = Stepper::from_growth(
        growth,
        SchemeConfig {
            dt: cfg.dt,
            d,
            ..SchemeConfig::default()
        },
    )?;
    let mut state = SimState::new(start, ScalarField::zeros(grid.clone()))?;
    let window_steps = ((1.0 / cfg.dt).round() as u64).max(1);
    let window = window_steps as f64 * cfg.dt;
    let windows = (cfg.t_max / window).ceil() as u64;
    let mut rate = f64::INFINITY;
    let mut next_newton_rate = 1e-2;
    for _ in 0..windows {
        let before = state.u.clone();
        for _ in 0..window_steps {
            stepper.step_in_place(&mut state)?;
        }
        rate = state.u.sup_diff(&before)? / window;
        let size = state.u.sup_norm();
        if size < cfg.extinction_tol {
            return Ok(ScalarField::zeros(grid));
        }
        if rate < cfg.settle_tol || rate < next_newton_rate {
            if let Some(root) = newton_polish(&state.u, growth, d) {
                if root.sup_norm() < cfg.extinction_tol {
                    return Ok(ScalarField::zeros(grid));
                }
                return Ok(root);
            }
            next_newton_rate = rate * 0.1;
        }
        if rate < cfg.settle_tol {
            let residual = logistic_residual(&state.u, growth, d)?.sup_norm();
            if residual <= RESIDUAL_TOL {
                return Ok(state.u);
            }
            return Err(SteadyError::ResidualTooLarge {
                residual,
                tolerance: RESIDUAL_TOL,
            });
        }
    }
    Err(SteadyError::NotSettled {
        t_max: cfg.t_max,
        rate,
    })
}

/// Logistic steady state for growth rate `growth`; the zero field when the
/// population goes extinct.
pub fn solve_logistic_steady(
    growth: &ScalarField,
    d: f64,
    cfg: &SteadySolveConfig,
) -> Result<ScalarField, SteadyError> {
    if !(d.is_finite() && d > 0.0) {
        return Err(SteadyError::InvalidConfig(format!(
            "d must be positive, got {d}"
        )));
    }
    let floor = 0.1 * growth.sup_norm() + 0.1;
    let start = growth.map(|g| g.max(floor));
    solve_logistic_steady_from(growth, d, cfg, start)
}

/// `integrate(u* (g - u*))`, which vanishes for an exact discrete steady state.
pub fn steady_integral_identity(
    u_star: &ScalarField,
    growth: &ScalarField,
) -> Result<f64, GridError> {
    Ok(u_star.zip_map(growth, |u, g| u * (g - u))?.integrate())
}

/// Whether `g - u* > 0` somewhere.
///
/// Differences at rounding level of `g` are not counted, so a constant
/// environment with `u* = g` reports `false`.
pub fn omega_star_nonempty(u_star: &ScalarField, growth: &ScalarField) -> Result<bool, GridError> {
    let tol = 1e-12 * (1.0 + growth.sup_norm());
    Ok(u_star.zip_map(growth, |u, g| g - u)?.max_value() > tol)
}

/// The steady states `u*_0, u*_1, ...` with the growth rate used for each.
#[derive(Debug, Clone)]
pub struct UStarCascade {
    pub iterates: Vec<ScalarField>,
    pub growth_rates: Vec<ScalarField>,
    /// Elliptic residual of each iterate against its own growth rate.
    pub residuals: Vec<f64>,
    /// `[a_min]_+`.
    pub limit: f64,
}

impl UStarCascade {
    /// `max_k max_x (u*_{k+1} - u*_k)`; at most [`MONOTONE_SLACK`] for a monotone cascade.
    pub fn monotonicity_violation(&self) -> f64 {
        self.iterates
            .windows(2)
            .map(|w| {
                w[1].zip_map(&w[0], |a, b| a - b)
                    .map(|f| f.max_value())
                    .unwrap_or(f64::INFINITY)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn distances_to_limit(&self) -> Vec<f64> {
        self.iterates
            .iter()
            .map(|u| {
                u.values()
                    .iter()
                    .fold(0.0, |m: f64, v| m.max((v - self.limit).abs()))
            })
            .collect()
    }

    pub fn last(&self) -> &ScalarField {
        self.iterates
            .last()
            .expect("cascade has at least one iterate")
    }

    /// One row per stage: `k,sup_norm,dist_to_limit,residual`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "k,sup_norm,dist_to_limit,residual")?;
        for (k, ((u, dist), res)) in self
            .iterates
            .iter()
            .zip(self.distances_to_limit())
            .zip(&self.residuals)
            .enumerate()
        {
            writeln!(out, "{k},{:?},{dist:?},{res:?}", u.sup_norm())?;
        }
        Ok(())
    }
}

/// Build the cascade for `env` up to `k_max` stages, stopping early once an
/// iterate is within `cfg.cascade_tol` of `[a_min]_+`.
pub fn cascade(
    env: &Environment,
    d: f64,
    k_max: usize,
    cfg: &SteadySolveConfig,
) -> Result<UStarCascade, SteadyError> {
    if k_max < 1 {
        return Err(SteadyError::InvalidConfig(
            "k_max must be at least 1".into(),
        ));
    }
    let a = env.field();
    let limit = env.a_min().max(0.0);
    let first = solve_logistic_steady(a, d, cfg)?;
    if first.sup_norm() == 0.0 {
        return Err(SteadyError::CascadeAssumptionViolated);
    }
    let mut out = UStarCascade {
        residuals: vec![logistic_residual(&first, a, d)?.sup_norm()],
        iterates: vec![first],
        growth_rates: vec![a.clone()],
        limit,
    };
    for _ in 0..k_max {
        let prev = out.last().clone();
        if dist(&prev, limit) < cfg.cascade_tol {
            break;
        }
        // a - [a - u*_k]_+
        let excess = a.zip_map(&prev, |a, u| a - u)?.positive_part();
        let growth = a.zip_map(&excess, |a, e| a - e)?;
        let next = if prev.sup_norm() == 0.0 {
            prev.clone()
        } else {
            solve_logistic_steady_from(&growth, d, cfg, prev)?
        };
        out.residuals
            .push(logistic_residual(&next, &growth, d)?.sup_norm());
        out.growth_rates.push(growth);
        out.iterates.push(next);
    }
    Ok(out)
}

fn dist(u: &ScalarField, c: f64) -> f64 {
    u.values()
        .iter()
        .fold(0.0, |m: f64, v| m.max((v - c).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envdsl::parse;
    use crate::grid::sample;

    fn growth(src: &str, n: usize) -> ScalarField {
        let g = Grid::new_1d(1.0, n).unwrap();
        sample(&parse(src, 1).unwrap(), &g).unwrap()
    }

    #[test]
    fn constant_growth() {
        let g = growth("1", 65);
        let u = solve_logistic_steady(&g, 0.1, &SteadySolveConfig::default()).unwrap();
        assert!(u.sup_diff(&g).unwrap() < 1e-14);
        assert_eq!(steady_integral_identity(&g, &g).unwrap(), 0.0);
        assert!(!omega_star_nonempty(&u, &g).unwrap());
    }

    #[test]
    fn negative_growth_goes_extinct() {
        let g = growth("-1", 33);
        let u = solve_logistic_steady(&g, 0.1, &SteadySolveConfig::default()).unwrap();
        assert_eq!(u.sup_norm(), 0.0);
        assert_eq!(steady_integral_identity(&u, &g).unwrap(), 0.0);
    }

    #[test]
    fn heterogeneous_growth() {
        let g = growth("1 + 0.5*cos(pi*x)", 257);
        let u = solve_logistic_steady(&g, 0.1, &SteadySolveConfig::default()).unwrap();
        assert!(u.max_value() < 1.5);
        assert!(u.min_value() > 0.0);
        assert!(logistic_residual(&u, &g, 0.1).unwrap().sup_norm() <= RESIDUAL_TOL);
        assert!(steady_integral_identity(&u, &g).unwrap().abs() < 1e-6);
        assert!(omega_star_nonempty(&u, &g).unwrap());
    }

    #[test]
    fn newton_in_2d() {
        let grid = Grid::new_2d([1.0, 1.0], [33, 33]).unwrap();
        let g = sample(&parse("1 + 0.5*cos(pi*x)*cos(pi*y)", 2).unwrap(), &grid).unwrap();
        let u = solve_logistic_steady(&g, 0.05, &SteadySolveConfig::default()).unwrap();
        assert!(logistic_residual(&u, &g, 0.05).unwrap().sup_norm() < 1e-9);
        assert!(u.max_value() < g.max_value());
    }

    #[test]
    fn constant_cascade_is_flat() {
        let g = Grid::new_1d(1.0, 33).unwrap();
        let env = Environment::new(parse("0.8", 1).unwrap(), &g).unwrap();
        let c = cascade(&env, 0.1, 5, &SteadySolveConfig::default()).unwrap();
        assert_eq!(c.iterates.len(), 1);
        assert!(c.last().sup_diff(env.field()).unwrap() < 1e-14);
    }

    #[test]
    fn cascade_needs_positive_ustar() {
        let g = Grid::new_1d(1.0, 33).unwrap();
        let env = Environment::new(parse("-0.5 + 0.1*x", 1).unwrap(), &g).unwrap();
        assert_eq!(
            cascade(&env, 0.1, 5, &SteadySolveConfig::default()).unwrap_err(),
            SteadyError::CascadeAssumptionViolated
        );
        assert!(matches!(
            cascade(&env, 0.1, 0, &SteadySolveConfig::default()),
            Err(SteadyError::InvalidConfig(_))
        ));
    }

    #[test]
    fn csv_rows() {
        let g = Grid::new_1d(1.0, 65).unwrap();
        let env = Environment::new(parse("1 + 0.5*cos(pi*x)", 1).unwrap(), &g).unwrap();
        let c = cascade(&env, 0.1, 3, &SteadySolveConfig::default()).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), c.iterates.len() + 1);
        assert!(text.starts_with("k,sup_norm,dist_to_limit,residual\n0,"));
    }
}
