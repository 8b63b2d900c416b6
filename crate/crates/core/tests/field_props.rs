use std::sync::Arc;

use lvhybrid::grid::{Grid, ScalarField};
use lvhybrid::linops::{apply_laplacian, solve_diffusion, DiffusionPropagator};
use proptest::prelude::*;

fn grid_1d() -> impl Strategy<Value = Arc<Grid>> {
    (3usize..40, 0.2f64..5.0).prop_map(|(n, l)| Grid::new_1d(l, n).unwrap())
}

fn grid_any() -> impl Strategy<Value = Arc<Grid>> {
    prop_oneof![
        grid_1d(),
        (3usize..12, 3usize..12, 0.5f64..2.0, 0.5f64..2.0)
            .prop_map(|(nx, ny, lx, ly)| Grid::new_2d([lx, ly], [nx, ny]).unwrap()),
    ]
}

fn field_on(grid: Arc<Grid>, lo: f64, hi: f64) -> impl Strategy<Value = ScalarField> {
    proptest::collection::vec(lo..hi, grid.len())
        .prop_map(move |v| ScalarField::new(grid.clone(), v).unwrap())
}

fn pair() -> impl Strategy<Value = (ScalarField, ScalarField)> {
    grid_any().prop_flat_map(|g| (field_on(g.clone(), -5.0, 5.0), field_on(g, -5.0, 5.0)))
}

fn dot(f: &ScalarField, g: &ScalarField) -> f64 {
    f.zip_map(g, |a, b| a * b).unwrap().integrate()
}

proptest! {
    #[test]
    fn integrate_is_linear((f, g) in pair(), alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
        let lhs = f.axpby(alpha, &g, beta).unwrap().integrate();
        let rhs = alpha * f.integrate() + beta * g.integrate();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()) * f.len() as f64);
    }

    #[test]
    fn positive_part_properties((f, _) in pair()) {
        let p = f.positive_part();
        prop_assert!(p.min_value() >= 0.0);
        prop_assert_eq!(p.positive_part(), p.clone());
        let neg = f.map(|x| -x).positive_part();
        prop_assert_eq!(p.axpby(1.0, &neg, -1.0).unwrap(), f.clone());
    }

    #[test]
    fn sup_diff_is_a_metric((f, g) in pair(), shift in -2.0f64..2.0) {
        let h = g.map(|x| x * 0.5 + shift);
        let fg = f.sup_diff(&g).unwrap();
        prop_assert_eq!(fg, g.sup_diff(&f).unwrap());
        prop_assert_eq!(f.sup_diff(&f).unwrap(), 0.0);
        prop_assert!(f.sup_diff(&h).unwrap() <= fg + g.sup_diff(&h).unwrap() + 1e-15);
    }

    #[test]
    fn laplacian_conserves_and_is_self_adjoint((f, g) in pair()) {
        let lf = apply_laplacian(&f);
        let lg = apply_laplacian(&g);
        let scale: f64 = lf.sup_norm().max(lg.sup_norm()) * f.grid().measure() + 1.0;
        prop_assert!(lf.integrate().abs() <= 1e-11 * scale);
        prop_assert!((dot(&lf, &g) - dot(&f, &lg)).abs() <= 1e-10 * scale * (1.0 + f.sup_norm() + g.sup_norm()));
    }

    #[test]
    fn diffusion_solve_has_small_residual(f in grid_any().prop_flat_map(|g| field_on(g, -5.0, 5.0)), c in 1e-4f64..1.0) {
        let x = solve_diffusion(&f, c).unwrap();
        let residual = x.axpby(1.0, &apply_laplacian(&x), -c).unwrap().sup_diff(&f).unwrap();
        let h = f.grid().spacing()[0].min(if f.grid().dimension() == 2 { f.grid().spacing()[1] } else { f64::INFINITY });
        prop_assert!(residual <= 1e-12 * (1.0 + 8.0 * c / (h * h)) * (1.0 + f.sup_norm()), "{residual}");
    }

    #[test]
    fn propagator_is_positive_and_contracting(f in grid_any().prop_flat_map(|g| field_on(g, 0.0, 3.0)), t in 0.0f64..2.0) {
        let p = DiffusionPropagator::new(f.grid(), t).unwrap();
        let g = p.apply(&f).unwrap();
        prop_assert!(g.min_value() >= f.min_value() - 1e-12);
        prop_assert!(g.max_value() <= f.max_value() + 1e-12);
        prop_assert!((g.integrate() - f.integrate()).abs() <= 1e-12 * (1.0 + f.integrate().abs()) * f.len() as f64);
    }
}
