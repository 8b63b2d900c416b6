//! One-parameter sweeps over a base scenario.

use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::{run_scenario, RunReport, Scenario, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    D,
    EpsilonV,
    /// The constant `c` of continuum initial data `(c, a - c)`.
    C,
    /// Nodes per axis.
    Grid,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::D => "d",
            SweepAxis::EpsilonV => "epsilon_v",
            SweepAxis::C => "c",
            SweepAxis::Grid => "grid",
        }
    }

    /// The scenario with this axis set to `value`, in its own output subdirectory.
    pub fn apply(self, base: &Scenario, value: f64) -> Result<Scenario, String> {
        let mut sc = base.clone();
        match self {
            SweepAxis::D => sc.d = value,
            SweepAxis::EpsilonV => sc.epsilon_v = value,
            SweepAxis::C => {
                if base.c.is_none() {
                    return Err("the c axis needs a scenario defined by profiles.c".into());
                }
                sc.c = Some(value);
            }
            SweepAxis::Grid => {
                if value.fract() != 0.0 || value < 2.0 {
                    return Err(format!("grid values must be node counts, got {value}"));
                }
                sc.nodes = [value as usize; 2];
            }
        }
        sc.name = format!("{}-{}={value}", base.name, self.name());
        sc.out_dir = base.out_dir.join(format!("{}={value}", self.name()));
        sc.validate().map_err(|e| e.to_string())?;
        Ok(sc)
    }
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "d" => Ok(SweepAxis::D),
            "epsilon_v" | "epsilon" | "eps" => Ok(SweepAxis::EpsilonV),
            "c" => Ok(SweepAxis::C),
            "grid" | "nodes" => Ok(SweepAxis::Grid),
            _ => Err(format!(
                "unknown sweep axis {s:?} (expected d, epsilon_v, c or grid)"
            )),
        }
    }
}

#[derive(Debug)]
pub struct SweepEntry {
    pub value: f64,
    /// Errors are kept per run so the rest of the sweep continues.
    pub result: Result<RunReport, String>,
}

/// Run `base` once per value, on up to `workers` threads. Entries come back
/// in the order of `values`.
pub fn sweep(base: &Scenario, axis: SweepAxis, values: &[f64], workers: usize) -> Vec<SweepEntry> {
    let run = |&value: &f64| SweepEntry {
        value,
        result: axis
            .apply(base, value)
            .and_then(|sc| run_scenario(&sc).map_err(|e| e.to_string())),
    };
    match rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
    {
        Ok(pool) => pool.install(|| values.par_iter().map(run).collect()),
        Err(_) => values.iter().map(run).collect(),
    }
}

/// `value,final_sup_u,final_sup_v,status,verdicts`; verdicts as `check:status` joined by `;`.
pub fn write_sweep_summary<W: Write>(entries: &[SweepEntry], mut out: W) -> io::Result<()> {
    writeln!(out, "value,final_sup_u,final_sup_v,status,verdicts")?;
    for e in entries {
        match &e.result {
            Ok(r) => {
                let (su, sv) = r
                    .final_state
                    .as_ref()
                    .map(|f| (format!("{:?}", f.sup_u), format!("{:?}", f.sup_v)))
                    .unwrap_or_default();
                let verdicts: Vec<String> = r
                    .verdicts
                    .iter()
                    .map(|v| {
                        let s = match v.status {
                            Status::Pass => "pass",
                            Status::Fail => "fail",
                            Status::Skipped => "skipped",
                        };
                        format!("{}:{s}", v.check.name())
                    })
                    .collect();
                let status = if r.passed() { "pass" } else { "fail" };
                writeln!(
                    out,
                    "{:?},{su},{sv},{status},{}",
                    e.value,
                    verdicts.join(";")
                )?;
            }
            Err(msg) => {
                let msg = msg.replace([',', '\n'], " ");
                writeln!(out, "{:?},,,error,{msg}", e.value)?;
            }
        }
    }
    Ok(())
}
