//! The steady-state cascade `u*_{k+1}` solved with growth `min(a, u*_k)`.
//! Pass a stage limit as the first argument (default 200).

use lvhybrid::envdsl::parse;
use lvhybrid::grid::{Environment, Grid};
use lvhybrid::steady::{cascade, SteadySolveConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let k_max: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(200);
    let grid = Grid::new_1d(1.0, 129)?;
    let env = Environment::new(parse("1 + 0.5*cos(pi*x)", 1)?, &grid)?;

    let c = cascade(&env, 0.1, k_max, &SteadySolveConfig::default())?;
    let dist = c.distances_to_limit();
    for k in [0, 1, 2, 5, 10, 20, 50, 100, 150, 200] {
        if let Some(d) = dist.get(k) {
            println!(
                "k = {k:>3}  sup u*_k = {:.6}  distance to {} = {d:.3e}",
                c.iterates[k].sup_norm(),
                c.limit
            );
        }
    }
    println!(
        "stages: {}, monotonicity violation: {:.1e}",
        c.iterates.len() - 1,
        c.monotonicity_violation().max(0.0)
    );
    Ok(())
}
