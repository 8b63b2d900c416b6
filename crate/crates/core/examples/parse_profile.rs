//! Parse a growth-rate expression, print it back, and sample it on a grid.

use lvhybrid::envdsl::{parse, print};
use lvhybrid::grid::{sample, Environment, Grid};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "0.5 + cos(2*pi*x)".into());
    let profile = parse(&text, 1)?;
    println!("parsed:  {}", print(&profile));

    let grid = Grid::new_1d(1.0, 11)?;
    let a = sample(&profile, &grid)?;
    for (i, v) in a.values().iter().enumerate() {
        println!("  a({:.1}) = {v:+.4}", grid.coords(i)[0]);
    }

    let env = Environment::new(profile, &grid)?;
    println!(
        "a_min = {:.4}, sup a = {:.4}, sink present: {}",
        env.a_min(),
        env.a_sup(),
        env.sink_set_nonempty()
    );
    Ok(())
}
