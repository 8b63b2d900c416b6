//! Sweep the diffusion rate of `v` on a bundled scenario, in parallel.

use std::path::Path;

use lvhybrid::runner::{load_config, sweep, SweepAxis};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/slow-dispersal-1d.ini");
    let mut base = load_config(&path)?;
    base.out_dir = std::env::temp_dir().join("lvhybrid-sweep-example");

    for entry in sweep(&base, SweepAxis::EpsilonV, &[0.05, 0.01, 0.002, 0.0], 4) {
        match entry.result {
            Ok(r) => {
                let f = r.final_state.as_ref().expect("simulated");
                println!(
                    "epsilon_v = {:<6} t = {:>7.1}  sup u = {:.2e}  passed: {}",
                    entry.value,
                    f.t,
                    f.sup_u,
                    r.passed()
                );
            }
            Err(e) => println!("epsilon_v = {}: {e}", entry.value),
        }
    }
    println!("outputs under {}", base.out_dir.display());
    Ok(())
}
