use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lvhybrid::runner::{
    check_scenario, load_config, parse_list, run_cascade, run_scenario, sweep, write_sweep_summary,
    RunReport, Scenario, Status, SweepAxis,
};

#[derive(Parser)]
#[command(
    name = "lvhybrid",
    version,
    about = "Hybrid Lotka-Volterra competition simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dt: Option<f64>,
    /// Nodes per axis
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    tmax: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and its checks
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a scenario once per value of one parameter
    Sweep {
        config: PathBuf,
        /// d, epsilon_v, c or grid
        #[arg(long)]
        axis: SweepAxis,
        /// Comma-separated values
        #[arg(long)]
        values: String,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Build the steady-state cascade for the scenario's environment
    Cascade {
        config: PathBuf,
        #[arg(long, default_value_t = 50)]
        kmax: usize,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Validate a scenario and its initial-data hypotheses without running
    Check {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn load(path: &PathBuf, o: &Overrides) -> Result<Scenario, String> {
    let mut sc = load_config(path).map_err(|e| e.to_string())?;
    if let Some(out) = &o.out {
        sc.out_dir = out.clone();
    }
    if let Some(dt) = o.dt {
        sc.dt = dt;
    }
    if let Some(n) = o.nodes {
        sc.nodes = [n, n];
    }
    if let Some(t) = o.tmax {
        sc.t_max = t;
    }
    sc.validate().map_err(|e| e.to_string())?;
    Ok(sc)
}

fn print_report(r: &RunReport) {
    println!("scenario {} ({:.2} s)", r.scenario, r.wall_time_s);
    if let Some(f) = &r.final_state {
        println!(
            "  final t = {} ({}), sup u = {:e}, sup v = {:e}",
            f.t,
            if f.settled { "settled" } else { "horizon" },
            f.sup_u,
            f.sup_v
        );
    }
    for v in &r.verdicts {
        let status = match v.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        };
        println!("  {status} {}", v.check.name());
        for m in &v.measurements {
            let cmp = serde_json::to_value(m.comparator).ok();
            let cmp = cmp.as_ref().and_then(|c| c.as_str()).unwrap_or("?");
            println!(
                "       {} = {:e} {cmp} {:e}",
                m.quantity, m.value, m.threshold
            );
        }
        if let Some(n) = &v.note {
            println!("       {n}");
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(command: Command) -> Result<bool, String> {
    match command {
        Command::Run { config, overrides } => {
            let sc = load(&config, &overrides)?;
            let report = run_scenario(&sc).map_err(|e| e.to_string())?;
            print_report(&report);
            Ok(report.passed())
        }
        Command::Sweep {
            config,
            axis,
            values,
            workers,
            overrides,
        } => {
            let sc = load(&config, &overrides)?;
            let values = parse_list(&values)?;
            if values.is_empty() {
                return Err("--values needs at least one value".into());
            }
            let entries = sweep(&sc, axis, &values, workers);
            fs::create_dir_all(&sc.out_dir).map_err(|e| e.to_string())?;
            let path = sc.out_dir.join("sweep_summary.csv");
            let file = File::create(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            write_sweep_summary(&entries, BufWriter::new(file)).map_err(|e| e.to_string())?;
            let mut ok = true;
            for e in &entries {
                match &e.result {
                    Ok(r) => {
                        ok &= r.passed();
                        print_report(r);
                    }
                    Err(msg) => {
                        ok = false;
                        println!("{} = {}: error: {msg}", axis.name(), e.value);
                    }
                }
            }
            println!("summary written to {}", path.display());
            Ok(ok)
        }
        Command::Cascade {
            config,
            kmax,
            overrides,
        } => {
            let sc = load(&config, &overrides)?;
            let (c, path) = run_cascade(&sc, kmax).map_err(|e| e.to_string())?;
            let dists = c.distances_to_limit();
            println!(
                "{} stages, limit {}, final distance {:e}, monotonicity violation {:e}",
                c.iterates.len() - 1,
                c.limit,
                dists.last().copied().unwrap_or(f64::NAN),
                c.monotonicity_violation().max(0.0)
            );
            println!("written to {}", path.display());
            Ok(true)
        }
        Command::Check { config, overrides } => {
            let sc = load(&config, &overrides)?;
            let reports = check_scenario(&sc).map_err(|e| e.to_string())?;
            println!("scenario {}: configuration valid", sc.name);
            let mut ok = true;
            for r in &reports {
                ok &= r.passed;
                println!(
                    "  {} {}{}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.mode.name(),
                    r.reason
                        .as_ref()
                        .map(|s| format!(": {s}"))
                        .unwrap_or_default()
                );
            }
            Ok(ok)
        }
    }
}
