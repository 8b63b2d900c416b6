//! Discrete zero-flux Laplacian and the linear solves built on it.
//!
//! The boundary rows use ghost-point reflection, `f(-h) := f(h)`, which keeps
//! the stencil second order, conserves `integrate` exactly, and makes the
//! operator symmetric in the trapezoid inner product.

mod spectral;
mod tridiag;

use std::sync::Arc;

use thiserror::Error;

use crate::grid::{Grid, GridError, ScalarField};

pub use tridiag::Tridiagonal;

use spectral::SpectralBasis;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinopsError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("field must be strictly positive, found {value} at node {index}")]
    NonPositiveField { index: usize, value: f64 },
    #[error("diffusion coefficient must be finite and nonnegative, got {0}")]
    BadCoefficient(f64),
}

fn check_grid(grid: &Arc<Grid>, field: &ScalarField) -> Result<(), LinopsError> {
    if Arc::ptr_eq(grid, field.grid()) || **grid == **field.grid() {
        Ok(())
    } else {
        Err(GridError::Mismatch.into())
    }
}

/// Reflection stencil along one axis, accumulated into `out`.
fn axis_second_difference(
    values: &[f64],
    out: &mut [f64],
    n: usize,
    stride: usize,
    lines: impl Iterator<Item = usize>,
    h: f64,
) {
    let s = 1.0 / (h * h);
    for base in lines {
        let at = |i: usize| values[base + i * stride];
        out[base] += 2.0 * (at(1) - at(0)) * s;
        for i in 1..n - 1 {
            out[base + i * stride] += (at(i + 1) - 2.0 * at(i) + at(i - 1)) * s;
        }
        out[base + (n - 1) * stride] += 2.0 * (at(n - 2) - at(n - 1)) * s;
    }
}

/// The zero-flux Laplacian on a grid.
#[derive(Debug, Clone)]
pub struct NeumannLaplacian {
    grid: Arc<Grid>,
}

impl NeumannLaplacian {
    pub fn new(grid: &Arc<Grid>) -> Self {
        NeumannLaplacian { grid: grid.clone() }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn apply(&self, field: &ScalarField) -> Result<ScalarField, LinopsError> {
        check_grid(&self.grid, field)?;
        let mut out = vec![0.0; field.len()];
        self.apply_into(field.values(), &mut out);
        Ok(ScalarField::from_raw(self.grid.clone(), out))
    }

    /// `out = L values`, no checks.
    pub(crate) fn apply_into(&self, values: &[f64], out: &mut [f64]) {
        let [nx, ny] = self.grid.nodes();
        let [hx, hy] = self.grid.spacing();
        out.iter_mut().for_each(|v| *v = 0.0);
        axis_second_difference(values, out, nx, 1, (0..ny).map(|j| j * nx), hx);
        if self.grid.dimension() == 2 {
            axis_second_difference(values, out, ny, nx, 0..nx, hy);
        }
    }
}

/// Free-function form of [`NeumannLaplacian::apply`].
pub fn apply_laplacian(field: &ScalarField) -> ScalarField {
    NeumannLaplacian::new(field.grid())
        .apply(field)
        .expect("operator built on the field's own grid")
}

enum SolverKind {
    Identity,
    Thomas(Tridiagonal),
    Spectral(SpectralBasis),
}

/// Factorisation of `I - c L` for a fixed coefficient `c >= 0`.
///
/// 1D uses the Thomas algorithm; 2D diagonalises the operator with the cosine
/// transform, which is also a direct solve.
pub struct DiffusionSolver {
    grid: Arc<Grid>,
    coefficient: f64,
    kind: SolverKind,
}

impl std::fmt::Debug for DiffusionSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiffusionSolver")
            .field("coefficient", &self.coefficient)
            .finish()
    }
}

impl DiffusionSolver {
    pub fn new(grid: &Arc<Grid>, coefficient: f64) -> Result<Self, LinopsError> {
        if !(coefficient.is_finite() && coefficient >= 0.0) {
            return Err(LinopsError::BadCoefficient(coefficient));
        }
        let kind = if coefficient == 0.0 {
            SolverKind::Identity
        } else if grid.dimension() == 1 {
            let n = grid.nodes()[0];
            let h = grid.spacing()[0];
            let r = coefficient / (h * h);
            let mut lower = vec![-r; n];
            let mut upper = vec![-r; n];
            let diag = vec![1.0 + 2.0 * r; n];
            upper[0] = -2.0 * r;
            lower[n - 1] = -2.0 * r;
            lower[0] = 0.0;
            upper[n - 1] = 0.0;
            SolverKind::Thomas(
                Tridiagonal::factor(lower, diag, upper).expect("I - cL is an M-matrix"),
            )
        } else {
            SolverKind::Spectral(SpectralBasis::new(grid))
        };
        Ok(DiffusionSolver {
            grid: grid.clone(),
            coefficient,
            kind,
        })
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn solve(&self, b: &ScalarField) -> Result<ScalarField, LinopsError> {
        check_grid(&self.grid, b)?;
        let mut x = b.values().to_vec();
        self.solve_in_place(&mut x);
        Ok(ScalarField::from_raw(self.grid.clone(), x))
    }

    pub(crate) fn solve_in_place(&self, x: &mut [f64]) {
        match &self.kind {
            SolverKind::Identity => {}
            SolverKind::Thomas(t) => {
                // shift by the first value so constants come back exactly
                let offset = x[0];
                x.iter_mut().for_each(|v| *v -= offset);
                if x.iter().any(|&v| v != 0.0) {
                    t.solve_in_place(x);
                }
                x.iter_mut().for_each(|v| *v += offset);
            }
            SolverKind::Spectral(basis) => {
                let c = self.coefficient;
                basis.apply(x, |lambda| 1.0 / (1.0 - c * lambda));
            }
        }
    }
}

/// Solve `(I - c L) x = b`.
pub fn solve_diffusion(b: &ScalarField, c: f64) -> Result<ScalarField, LinopsError> {
    DiffusionSolver::new(b.grid(), c)?.solve(b)
}

/// Exact discrete propagator `exp(t (D L - k))` for diffusion rate `D` and a
/// uniform decay rate `k >= 0`.
///
/// The matrix exponential of the reflection Laplacian has nonnegative entries,
/// so the propagator maps nonnegative fields to nonnegative fields (up to the
/// rounding of the transform).
#[derive(Debug, Clone)]
pub struct DiffusionPropagator {
    basis: SpectralBasis,
    diffusion_time: f64,
    decay: f64,
}

impl DiffusionPropagator {
    /// Propagator for `diffusion_time = D * t`.
    pub fn new(grid: &Arc<Grid>, diffusion_time: f64) -> Result<Self, LinopsError> {
        Self::with_decay(grid, diffusion_time, 0.0)
    }

    /// Propagator for `diffusion_time = D * t` with the factor `exp(-decay)` applied.
    pub fn with_decay(
        grid: &Arc<Grid>,
        diffusion_time: f64,
        decay: f64,
    ) -> Result<Self, LinopsError> {
        if !(diffusion_time.is_finite() && diffusion_time >= 0.0) {
            return Err(LinopsError::BadCoefficient(diffusion_time));
        }
        Ok(DiffusionPropagator {
            basis: SpectralBasis::new(grid),
            diffusion_time,
            decay,
        })
    }

    pub fn apply(&self, field: &ScalarField) -> Result<ScalarField, LinopsError> {
        check_grid(self.basis.grid(), field)?;
        let mut v = field.values().to_vec();
        self.apply_in_place(&mut v);
        Ok(ScalarField::from_raw(self.basis.grid().clone(), v))
    }

    pub(crate) fn apply_in_place(&self, values: &mut [f64]) {
        if self.diffusion_time > 0.0 {
            let tau = self.diffusion_time;
            self.basis.apply(values, |lambda| (tau * lambda).exp());
        }
        if self.decay != 0.0 {
            let f = (-self.decay).exp();
            values.iter_mut().for_each(|v| *v *= f);
        }
    }
}

/// Quadrature of `|grad ln u|^2` from differences of `ln u` across cell edges.
///
/// Each edge contributes `(ln u_b - ln u_a)^2 / h^2` times its measure: `h`
/// in 1D, `h` times the transverse trapezoid weight in 2D.
pub fn grad_log_energy(u: &ScalarField) -> Result<f64, LinopsError> {
    if let Some((index, &value)) = u.values().iter().enumerate().find(|(_, &v)| v <= 0.0) {
        return Err(LinopsError::NonPositiveField { index, value });
    }
    let grid = u.grid();
    let logs: Vec<f64> = u.values().iter().map(|v| v.ln()).collect();
    let [nx, ny] = grid.nodes();
    let [hx, hy] = grid.spacing();
    let transverse = |n: usize, h: f64, j: usize| {
        if grid.dimension() == 1 {
            1.0
        } else if j == 0 || j == n - 1 {
            0.5 * h
        } else {
            h
        }
    };
    let mut total = 0.0;
    for j in 0..ny {
        let w = transverse(ny, hy, j);
        let row = &logs[j * nx..(j + 1) * nx];
        let s: f64 = row.windows(2).map(|p| (p[1] - p[0]).powi(2)).sum();
        total += s / hx * w;
    }
    if grid.dimension() == 2 {
        for i in 0..nx {
            let w = transverse(nx, hx, i);
            let s: f64 = (0..ny - 1)
                .map(|j| (logs[(j + 1) * nx + i] - logs[j * nx + i]).powi(2))
                .sum();
            total += s / hy * w;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envdsl::parse;
    use crate::grid::sample;
    use std::f64::consts::PI;

    fn field(g: &Arc<Grid>, src: &str) -> ScalarField {
        sample(&parse(src, g.dimension()).unwrap(), g).unwrap()
    }

    fn pseudo_random(g: &Arc<Grid>, seed: u64) -> ScalarField {
        // deterministic LCG, values in [0, 1)
        let mut s = seed;
        let vals = (0..g.len())
            .map(|_| {
                s = s
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                (s >> 11) as f64 / (1u64 << 53) as f64
            })
            .collect();
        ScalarField::new(g.clone(), vals).unwrap()
    }

    #[test]
    fn constants_in_kernel() {
        for g in [
            Grid::new_1d(1.0, 17).unwrap(),
            Grid::new_2d([1.0, 2.0], [9, 5]).unwrap(),
        ] {
            let c = ScalarField::constant(g.clone(), 3.7);
            assert!(apply_laplacian(&c).values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn reflection_stencil_on_square() {
        let g = Grid::new_1d(1.0, 5).unwrap();
        let lap = apply_laplacian(&field(&g, "x^2"));
        assert_eq!(lap.values(), &[2.0, 2.0, 2.0, 2.0, -14.0]);
    }

    #[test]
    fn cosine_laplacian_accuracy() {
        let g = Grid::new_1d(1.0, 257).unwrap();
        let lap = apply_laplacian(&field(&g, "cos(pi*x)"));
        let exact = field(&g, "-pi^2*cos(pi*x)");
        assert!(lap.sup_diff(&exact).unwrap() < 1e-3);
    }

    #[test]
    fn second_order_convergence() {
        let mut errs = Vec::new();
        for n in [33, 65, 129] {
            let g = Grid::new_1d(1.0, n).unwrap();
            let lap = apply_laplacian(&field(&g, "cos(2*pi*x) + cos(pi*x)"));
            let exact = field(&g, "-4*pi^2*cos(2*pi*x) - pi^2*cos(pi*x)");
            errs.push(lap.sup_diff(&exact).unwrap());
        }
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.8..4.2).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn conservation_and_symmetry() {
        for g in [
            Grid::new_1d(2.0, 33).unwrap(),
            Grid::new_2d([1.0, 1.5], [9, 13]).unwrap(),
        ] {
            let f = pseudo_random(&g, 7);
            let h = pseudo_random(&g, 11);
            let lf = apply_laplacian(&f);
            let lh = apply_laplacian(&h);
            let scale = lf.sup_norm() * g.measure();
            assert!(lf.integrate().abs() < 1e-13 * scale);
            let a = lf.zip_map(&h, |x, y| x * y).unwrap().integrate();
            let b = f.zip_map(&lh, |x, y| x * y).unwrap().integrate();
            assert!((a - b).abs() < 1e-13 * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn solve_identity_and_constants() {
        let g = Grid::new_1d(1.0, 65).unwrap();
        let b = pseudo_random(&g, 3);
        assert_eq!(solve_diffusion(&b, 0.0).unwrap(), b);
        let c = ScalarField::constant(g.clone(), 0.37);
        assert_eq!(solve_diffusion(&c, 2.5).unwrap(), c);
        let g2 = Grid::new_2d([1.0, 1.0], [9, 17]).unwrap();
        let c2 = ScalarField::constant(g2, 1.25);
        assert_eq!(solve_diffusion(&c2, 0.1).unwrap(), c2);
        assert!(matches!(
            solve_diffusion(&b, -1.0),
            Err(LinopsError::BadCoefficient(_))
        ));
    }

    #[test]
    fn solve_residual_and_positivity() {
        for g in [
            Grid::new_1d(1.0, 257).unwrap(),
            Grid::new_2d([1.0, 2.0], [33, 65]).unwrap(),
        ] {
            for c in [1e-4, 0.05, 3.0] {
                let b = pseudo_random(&g, 42);
                let x = solve_diffusion(&b, c).unwrap();
                let lx = apply_laplacian(&x);
                let resid = x.axpby(1.0, &lx, -c).unwrap().sup_diff(&b).unwrap();
                assert!(resid <= 1e-10 * b.sup_norm(), "c={c} residual {resid}");
                assert!(x.min_value() >= 0.0);
            }
        }
    }

    #[test]
    fn propagator_matches_cosine_mode_decay() {
        let g = Grid::new_1d(1.0, 129).unwrap();
        let f = field(&g, "1 + cos(pi*x)");
        let h = g.spacing()[0];
        let lambda = -4.0 / (h * h) * (PI * h / 2.0).sin().powi(2);
        let p = DiffusionPropagator::new(&g, 0.3).unwrap();
        let out = p.apply(&f).unwrap();
        let expect = f.map(|v| 1.0 + (v - 1.0) * (0.3 * lambda).exp());
        assert!(out.sup_diff(&expect).unwrap() < 1e-14);
        // semigroup
        let half = DiffusionPropagator::new(&g, 0.15).unwrap();
        let twice = half.apply(&half.apply(&f).unwrap()).unwrap();
        assert!(twice.sup_diff(&out).unwrap() < 1e-14);
        let c = ScalarField::constant(g.clone(), 0.25);
        assert_eq!(p.apply(&c).unwrap(), c);
        let decayed = DiffusionPropagator::with_decay(&g, 0.3, 0.5)
            .unwrap()
            .apply(&c)
            .unwrap();
        assert!((decayed.values()[3] - 0.25 * (-0.5f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn propagator_solves_heat_equation_2d() {
        let g = Grid::new_2d([1.0, 1.0], [17, 17]).unwrap();
        let f = field(&g, "exp(-4*((x-0.4)^2 + (y-0.6)^2))");
        let p = DiffusionPropagator::new(&g, 1e-6).unwrap();
        let out = p.apply(&f).unwrap();
        // first-order Taylor check: (P f - f)/tau ~ L f
        let lf = apply_laplacian(&f);
        let fd = out.axpby(1e6, &f, -1e6).unwrap();
        assert!(fd.sup_diff(&lf).unwrap() < 1e-3 * lf.sup_norm());
        let rough = pseudo_random(&g, 5);
        let smoothed = DiffusionPropagator::new(&g, 0.01)
            .unwrap()
            .apply(&rough)
            .unwrap();
        assert!(smoothed.min_value() > -1e-14);
        assert!((smoothed.integrate() - rough.integrate()).abs() < 1e-14);
    }

    #[test]
    fn grad_log_energy_cases() {
        let g = Grid::new_1d(1.0, 33).unwrap();
        assert_eq!(
            grad_log_energy(&ScalarField::constant(g.clone(), 2.0)).unwrap(),
            0.0
        );
        let e = grad_log_energy(&field(&g, "exp(x)")).unwrap();
        assert!((e - 1.0).abs() < 1e-13);
        assert!(matches!(
            grad_log_energy(&field(&g, "x")),
            Err(LinopsError::NonPositiveField { index: 0, .. })
        ));
        let g2 = Grid::new_2d([1.0, 2.0], [9, 9]).unwrap();
        // |grad ln u|^2 = 1 + 4 over area 2
        let e2 = grad_log_energy(&field(&g2, "exp(x + 2*y)")).unwrap();
        assert!((e2 - 10.0).abs() < 1e-12);
    }

    #[test]
    fn grad_log_energy_against_fine_quadrature() {
        let g = Grid::new_1d(1.0, 513).unwrap();
        let e = grad_log_energy(&field(&g, "1 + 0.5*sin(pi*x)")).unwrap();
        // composite Simpson on 20000 panels of (u'/u)^2
        let n = 20000;
        let f = |x: f64| {
            let u = 1.0 + 0.5 * (PI * x).sin();
            let du = 0.5 * PI * (PI * x).cos();
            (du / u).powi(2)
        };
        let h = 1.0 / n as f64;
        let mut s = f(0.0) + f(1.0);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        let oracle = s * h / 3.0;
        assert!((e - oracle).abs() < 1e-4, "{e} vs {oracle}");
    }
}
