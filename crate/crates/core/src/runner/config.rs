//! INI-style scenario files.
//!
//! ```text
//! # comment
//! [scenario]
//! name = sink-extinction-1d
//!
//! [profiles]
//! a  = 0.5 + cos(2*pi*x)
//! u0 = 0.3
//! v0 = 0.3
//!
//! [checks]
//! sink-extinction          # default tolerance
//! global-bound = 1e-6
//! ```
//!
//! Lines are `key = value`, a bare `key` (checks only), a `[section]` header,
//! or blank. `#` and `;` start comments. Keys are unique within a section.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::{CheckKind, CheckSpec, DiffusionChoice, Scenario};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{key}: {reason}")]
pub struct ConfigError {
    /// `section.key`, or a line reference for syntax errors.
    pub key: String,
    pub reason: String,
}

impl ConfigError {
    pub(crate) fn new(key: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

type Sections = BTreeMap<String, BTreeMap<String, (usize, Option<String>)>>;

fn parse_ini(text: &str) -> Result<Sections, ConfigError> {
    let mut sections: Sections = BTreeMap::new();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw.find(['#', ';']) {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| {
                    ConfigError::new(format!("line {line_no}"), "unterminated section header")
                })?
                .trim()
                .to_string();
            if name.is_empty() {
                return Err(ConfigError::new(
                    format!("line {line_no}"),
                    "empty section name",
                ));
            }
            sections.entry(name.clone()).or_default();
            current = Some(name);
            continue;
        }
        let section = current.clone().ok_or_else(|| {
            ConfigError::new(format!("line {line_no}"), "key outside any section")
        })?;
        let (key, value) = match line.split_once('=') {
            Some((k, v)) => (k.trim(), Some(v.trim()).filter(|v| !v.is_empty())),
            None => (line, None),
        };
        if key.is_empty() {
            return Err(ConfigError::new(format!("line {line_no}"), "missing key"));
        }
        let entries = sections.entry(section.clone()).or_default();
        if let Some((first, _)) = entries.get(key) {
            return Err(ConfigError::new(
                format!("{section}.{key}"),
                format!("duplicate key (first on line {first})"),
            ));
        }
        entries.insert(key.to_string(), (line_no, value.map(str::to_string)));
    }
    Ok(sections)
}

/// Typed access that consumes keys so leftovers can be reported.
struct Reader {
    sections: Sections,
}

impl Reader {
    fn take(&mut self, section: &str, key: &str) -> Option<String> {
        self.take_raw(section, key).flatten()
    }

    fn take_raw(&mut self, section: &str, key: &str) -> Option<Option<String>> {
        self.sections.get_mut(section)?.remove(key).map(|(_, v)| v)
    }

    fn parsed<T: std::str::FromStr>(
        &mut self,
        section: &str,
        key: &str,
    ) -> Result<Option<T>, ConfigError> {
        match self.take(section, key) {
            None => Ok(None),
            Some(s) => s.parse().map(Some).map_err(|_| {
                ConfigError::new(format!("{section}.{key}"), format!("cannot parse {s:?}"))
            }),
        }
    }

    fn list(&mut self, section: &str, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.take(section, key) {
            None => Ok(None),
            Some(s) => parse_list(&s)
                .map(Some)
                .map_err(|reason| ConfigError::new(format!("{section}.{key}"), reason)),
        }
    }

    fn leftovers(&self) -> Result<(), ConfigError> {
        for (section, keys) in &self.sections {
            if let Some((key, _)) = keys.iter().next() {
                return Err(ConfigError::new(format!("{section}.{key}"), "unknown key"));
            }
        }
        Ok(())
    }
}

/// Comma-separated numbers, as used by list-valued keys and `--values`.
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| p.trim())
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse::<f64>()
                .map_err(|_| format!("cannot parse {p:?} as a number"))
        })
        .collect()
}

const SECTIONS: [&str; 8] = [
    "scenario", "domain", "profiles", "scheme", "run", "checks", "params", "output",
];

/// Parse scenario text. Relative output directories are kept as written.
pub fn parse_config(text: &str) -> Result<Scenario, ConfigError> {
    let sections = parse_ini(text)?;
    if let Some(unknown) = sections.keys().find(|s| !SECTIONS.contains(&s.as_str())) {
        return Err(ConfigError::new(format!("[{unknown}]"), "unknown section"));
    }
    let mut r = Reader { sections };
    let name = r
        .take("scenario", "name")
        .ok_or_else(|| ConfigError::new("scenario.name", "required"))?;
    let mut sc = Scenario {
        name,
        ..Scenario::default()
    };

    if let Some(dim) = r.parsed::<u8>("domain", "dimension")? {
        if dim != 1 && dim != 2 {
            return Err(ConfigError::new("domain.dimension", "must be 1 or 2"));
        }
        sc.dimension = dim;
    }
    if let Some(ext) = r.list("domain", "extent")? {
        sc.extents = match ext[..] {
            [l] => [l, l],
            [lx, ly] => [lx, ly],
            _ => {
                return Err(ConfigError::new(
                    "domain.extent",
                    "expected one or two lengths",
                ))
            }
        };
    }
    if let Some(nodes) = r.list("domain", "nodes")? {
        let as_count = |v: f64| {
            (v.fract() == 0.0 && v >= 2.0)
                .then_some(v as usize)
                .ok_or_else(|| {
                    ConfigError::new("domain.nodes", "node counts must be integers >= 2")
                })
        };
        sc.nodes = match nodes[..] {
            [n] => [as_count(n)?, as_count(n)?],
            [nx, ny] => [as_count(nx)?, as_count(ny)?],
            _ => {
                return Err(ConfigError::new(
                    "domain.nodes",
                    "expected one or two counts",
                ))
            }
        };
    }

    sc.a = r
        .take("profiles", "a")
        .ok_or_else(|| ConfigError::new("profiles.a", "required"))?;
    sc.c = r.parsed("profiles", "c")?;
    sc.u0 = r.take("profiles", "u0").unwrap_or_default();
    sc.v0 = r.take("profiles", "v0").unwrap_or_default();
    match (sc.c.is_some(), sc.u0.is_empty(), sc.v0.is_empty()) {
        (true, true, true) | (false, false, false) => {}
        (true, _, _) => {
            return Err(ConfigError::new(
                "profiles.c",
                "c sets u0 = c and v0 = a - c; do not also give u0 or v0",
            ))
        }
        (false, true, _) => return Err(ConfigError::new("profiles.u0", "required")),
        (false, _, true) => return Err(ConfigError::new("profiles.v0", "required")),
    }

    if let Some(d) = r.parsed("scheme", "d")? {
        sc.d = d;
    }
    if let Some(e) = r.parsed("scheme", "epsilon_v")? {
        sc.epsilon_v = e;
    }
    if let Some(dt) = r.parsed("scheme", "dt")? {
        sc.dt = dt;
    }
    if let Some(s) = r.take("scheme", "diffusion") {
        sc.diffusion = match s.as_str() {
            "exact" => DiffusionChoice::Exact,
            "backward-euler" => DiffusionChoice::BackwardEuler,
            _ => {
                return Err(ConfigError::new(
                    "scheme.diffusion",
                    format!("expected exact or backward-euler, got {s:?}"),
                ))
            }
        };
    }

    if let Some(t) = r.parsed("run", "t_max")? {
        sc.t_max = t;
    }
    if let Some(t) = r.parsed("run", "settle_tol")? {
        sc.settle_tol = t;
    }
    if let Some(t) = r.parsed("run", "snapshot_every")? {
        sc.snapshot_every = t;
    }
    if let Some(n) = r.parsed("run", "field_every")? {
        sc.field_every = n;
    }

    if let Some(keys) = r.sections.remove("checks") {
        for (name, (_, value)) in keys {
            let kind = CheckKind::from_name(&name)
                .ok_or_else(|| ConfigError::new(format!("checks.{name}"), "unknown check"))?;
            let tolerance = match value {
                None => None,
                Some(v) => Some(v.parse::<f64>().map_err(|_| {
                    ConfigError::new(
                        format!("checks.{name}"),
                        format!("cannot parse tolerance {v:?}"),
                    )
                })?),
            };
            sc.checks.push(CheckSpec { kind, tolerance });
        }
        sc.checks.sort_by_key(|c| c.kind);
    }

    let p = &mut sc.params;
    macro_rules! param {
        ($field:ident) => {
            if let Some(v) = r.parsed("params", stringify!($field))? {
                p.$field = v;
            }
        };
    }
    param!(floor_tol);
    param!(bound_after);
    param!(threshold_after);
    param!(k_max);
    param!(strict_bound_margin);
    param!(oracle_horizon);
    param!(oracle_fine_dt);
    param!(oracle_ratio);
    param!(lyapunov_refine);
    param!(lyapunov_refine_horizon);
    param!(lyapunov_ratio);
    if let Some(dts) = r.list("params", "oracle_dts")? {
        match dts[..] {
            [coarse, fine] => p.oracle_dts = [coarse, fine],
            _ => {
                return Err(ConfigError::new(
                    "params.oracle_dts",
                    "expected two time steps",
                ))
            }
        }
    }

    if let Some(dir) = r.take("output", "dir") {
        sc.out_dir = PathBuf::from(dir);
    } else {
        sc.out_dir = PathBuf::from("out").join(&sc.name);
    }

    r.leftovers()?;
    sc.validate()?;
    Ok(sc)
}

/// Read and parse a scenario file.
pub fn load_config(path: impl AsRef<Path>) -> Result<Scenario, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new(path.display().to_string(), e.to_string()))?;
    parse_config(&text)
}
