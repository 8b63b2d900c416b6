//! Compare the splitting scheme against the Picard iteration of the mild
//! formulation at a short horizon, for a sequence of time steps.

use lvhybrid::envdsl::parse;
use lvhybrid::grid::{sample, Environment, Grid};
use lvhybrid::stepper::{picard_mild_solve, SchemeConfig, SimState, Stepper, StopCriteria};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::new_1d(1.0, 129)?;
    let env = Environment::new(parse("1 + 0.5*cos(pi*x)", 1)?, &grid)?;
    let u0 = sample(&parse("0.5 + 0.3*cos(2*pi*x)", 1)?, &grid)?;
    let v0 = sample(&parse("0.2 + 0.1*x", 1)?, &grid)?;
    let (d, horizon) = (0.1, 0.1);

    let reference = picard_mild_solve(&u0, &v0, &env, d, horizon, 200)?;
    let mut previous: Option<f64> = None;
    for dt in [0.05, 0.025, 0.0125, 0.00625] {
        let stepper = Stepper::new(
            &env,
            SchemeConfig {
                dt,
                d,
                ..SchemeConfig::default()
            },
        )?;
        let stop = StopCriteria {
            t_max: horizon,
            settle_tol: 0.0,
            ..StopCriteria::default()
        };
        let (end, _) = stepper.run(SimState::new(u0.clone(), v0.clone())?, &stop, |_| {})?;
        let gap = end
            .u
            .sup_diff(&reference.u)?
            .max(end.v.sup_diff(&reference.v)?);
        let ratio = previous
            .map(|p| format!("ratio {:.2}", p / gap))
            .unwrap_or_default();
        println!("dt = {dt:<8} gap = {gap:.3e}  {ratio}");
        previous = Some(gap);
    }
    Ok(())
}
