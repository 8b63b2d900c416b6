//! With a sink (`a < 0` somewhere), `u` dies out and `v` settles on `[a]_+`.

use lvhybrid::envdsl::parse;
use lvhybrid::grid::{sample, Environment, Grid, ScalarField};
use lvhybrid::stepper::{SchemeConfig, SimState, Stepper, StopCriteria};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::new_1d(1.0, 257)?;
    let env = Environment::new(parse("0.5 + cos(2*pi*x)", 1)?, &grid)?;
    let u0 = ScalarField::constant(grid.clone(), 0.5);
    let v0 = ScalarField::constant(grid.clone(), 0.5);

    let stepper = Stepper::new(&env, SchemeConfig::default())?;
    let stop = StopCriteria {
        snapshot_every: 100.0,
        ..StopCriteria::default()
    };
    let (end, outcome) = stepper.run(SimState::new(u0, v0)?, &stop, |s| {
        println!(
            "t = {:>7.1}  sup u = {:.3e}  sup v = {:.4}",
            s.t,
            s.u.sup_norm(),
            s.v.sup_norm()
        );
    })?;

    let a_plus = sample(&parse("max(0, 0.5 + cos(2*pi*x))", 1)?, &grid)?;
    println!("{outcome:?} at t = {}", end.t);
    println!("sup |v - [a]_+| = {:.2e}", end.v.sup_diff(&a_plus)?);
    Ok(())
}
