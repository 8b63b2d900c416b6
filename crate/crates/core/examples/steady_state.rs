//! Solve the logistic steady state `d u'' + u (a - u) = 0` and check it.

use lvhybrid::envdsl::parse;
use lvhybrid::grid::{Environment, Grid};
use lvhybrid::steady::{
    logistic_residual, omega_star_nonempty, solve_logistic_steady, steady_integral_identity,
    SteadySolveConfig,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::new_1d(1.0, 257)?;
    let env = Environment::new(parse("1 + 0.5*cos(pi*x)", 1)?, &grid)?;
    let d = 0.1;

    let u = solve_logistic_steady(env.field(), d, &SteadySolveConfig::default())?;
    let residual = logistic_residual(&u, env.field(), d)?.sup_norm();
    println!("max u* = {:.6}  (sup a = {})", u.max_value(), env.a_sup());
    println!("min u* = {:.6}", u.min_value());
    println!("elliptic residual = {residual:.2e}");
    println!(
        "integral of u*(a - u*) = {:.2e}",
        steady_integral_identity(&u, env.field())?
    );
    println!(
        "a > u* somewhere: {}",
        omega_star_nonempty(&u, env.field())?
    );
    Ok(())
}
