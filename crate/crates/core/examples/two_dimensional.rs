//! A patchy environment on the unit square.

use lvhybrid::envdsl::parse;
use lvhybrid::grid::{sample, Environment, Grid};
use lvhybrid::steady::{solve_logistic_steady, SteadySolveConfig};
use lvhybrid::stepper::{SchemeConfig, SimState, Stepper, StopCriteria};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::new_2d([1.0, 1.0], [33, 33])?;
    let env = Environment::new(parse("1 + 0.5*cos(pi*x)*cos(pi*y)", 2)?, &grid)?;
    let u0 = sample(&parse("0.5", 2)?, &grid)?;
    let v0 = sample(&parse("0.3 + 0.2*y", 2)?, &grid)?;

    let u_star = solve_logistic_steady(env.field(), 0.1, &SteadySolveConfig::default())?;
    println!(
        "u* ranges over [{:.4}, {:.4}]",
        u_star.min_value(),
        u_star.max_value()
    );

    let stepper = Stepper::new(&env, SchemeConfig::default())?;
    let stop = StopCriteria {
        t_max: 200.0,
        snapshot_every: 50.0,
        ..StopCriteria::default()
    };
    let (end, outcome) = stepper.run(SimState::new(u0, v0)?, &stop, |s| {
        println!(
            "t = {:>5.0}  sup u = {:.4}  min u = {:.4}  sup v = {:.4}",
            s.t,
            s.u.sup_norm(),
            s.u.min_value(),
            s.v.sup_norm()
        );
    })?;
    println!(
        "{outcome:?}; total mass u = {:.4}, v = {:.4}",
        end.u.integrate(),
        end.v.integrate()
    );
    Ok(())
}
