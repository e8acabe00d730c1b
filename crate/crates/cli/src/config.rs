//! Flat `key = value` experiment configuration and its validation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use vlab_core::volterra::MIN_CUTOFFS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    #[value(name = "snumbers")]
    Snumbers,
    #[value(name = "perturb_thm21")]
    PerturbThm21,
    #[value(name = "perturb_thm23")]
    PerturbThm23,
    #[value(name = "disk_restriction")]
    DiskRestriction,
    #[value(name = "criterion")]
    Criterion,
    #[value(name = "volterra_1d")]
    Volterra1d,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Self::Snumbers,
        Self::PerturbThm21,
        Self::PerturbThm23,
        Self::DiskRestriction,
        Self::Criterion,
        Self::Volterra1d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Snumbers => "snumbers",
            Self::PerturbThm21 => "perturb_thm21",
            Self::PerturbThm23 => "perturb_thm23",
            Self::DiskRestriction => "disk_restriction",
            Self::Criterion => "criterion",
            Self::Volterra1d => "volterra_1d",
        }
    }

    fn required(self) -> &'static [&'static str] {
        match self {
            Self::Snumbers => &["q", "dims", "seeds"],
            Self::PerturbThm21 => &["alpha", "q", "dims", "seeds"],
            Self::PerturbThm23 => &["beta", "q", "dims", "seeds"],
            Self::DiskRestriction => &["n_max", "k_max", "seeds", "rank"],
            Self::Criterion => &["n", "eps_list"],
            Self::Volterra1d => &["dims"],
        }
    }

    fn optional(self) -> &'static [&'static str] {
        match self {
            Self::Snumbers => &["alpha", "beta", "a", "window"],
            Self::PerturbThm21 => &["a", "delta", "q_j"],
            Self::PerturbThm23 => &["a", "delta", "window"],
            Self::DiskRestriction => &["delta", "s_scale", "source_n", "source_k", "image_n"],
            Self::Criterion => &[],
            Self::Volterra1d => &["window"],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| format!("unknown experiment '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format '{other}' (expected csv or json)")),
        }
    }
}

/// Keys that describe the output rather than the experiment.
const OUTPUT_KEYS: [&str; 3] = ["experiment", "format", "output"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub parameters: BTreeMap<String, String>,
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid configuration: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = split_assignment(line).map_err(|message| ConfigError::Syntax { line: i + 1, message })?;
        if map.insert(k.clone(), v).is_some() {
            return Err(ConfigError::Syntax { line: i + 1, message: format!("duplicate key '{k}'") });
        }
    }
    Ok(map)
}

/// Splits `key=value`, trimming both sides.
pub fn split_assignment(s: &str) -> Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key = value, got '{s}'"))?;
    let (k, v) = (k.trim(), v.trim());
    if k.is_empty() {
        return Err(format!("missing key in '{s}'"));
    }
    Ok((k.to_string(), v.to_string()))
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self { experiment, parameters: BTreeMap::new(), output_path: None, format: Format::Csv }
    }

    /// Sets a parameter, or the output fields for `format` / `output`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "format" => self.format = value.parse()?,
            "output" => self.output_path = Some(PathBuf::from(value)),
            "experiment" => {
                let e: Experiment = value.parse()?;
                if e != self.experiment {
                    return Err(format!("config is for '{e}', but '{}' was requested", self.experiment));
                }
            }
            _ => {
                self.parameters.insert(key.to_string(), value.to_string());
            }
        }
        Ok(())
    }

    pub fn with(mut self, key: &str, value: &str) -> Self {
        // rejected values are kept so that validate() reports them
        if self.set(key, value).is_err() {
            self.parameters.insert(key.to_string(), value.to_string());
        }
        self
    }

    /// Reads a config file and applies `key=value` overrides on top.
    pub fn load(experiment: Experiment, path: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
        let mut cfg = Self::new(experiment);
        let mut problems = Vec::new();
        for (k, v) in parse_key_values(&text)? {
            if let Err(p) = cfg.set(&k, &v) {
                problems.push(format!("{k}: {p}"));
            }
        }
        for o in overrides {
            match split_assignment(o).and_then(|(k, v)| cfg.set(&k, &v).map_err(|p| format!("{k}: {p}"))) {
                Ok(()) => {}
                Err(p) => problems.push(format!("--set {o}: {p}")),
            }
        }
        if problems.is_empty() {
            Ok(cfg)
        } else {
            Err(ConfigError::Invalid(problems))
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.parameters.get(key).map(String::as_str)
    }

    /// Every problem that would make `run` reject this config; empty when valid.
    pub fn validate(&self) -> Vec<String> {
        match Plan::resolve(self) {
            Ok(_) => Vec::new(),
            Err(problems) => problems,
        }
    }
}

/// A parsed list value.
fn split_list(raw: &str) -> Vec<&str> {
    let inner = raw.trim().trim_start_matches('[').trim_end_matches(']');
    inner.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

fn parse_floats(raw: &str) -> Result<Vec<f64>, String> {
    let items = split_list(raw);
    if items.is_empty() {
        return Err("empty list".into());
    }
    items
        .iter()
        .map(|s| match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(format!("'{s}' is not a finite number")),
        })
        .collect()
}

/// Integer list; items may be inclusive ranges `a..b`.
fn parse_ints(raw: &str) -> Result<Vec<u64>, String> {
    let items = split_list(raw);
    if items.is_empty() {
        return Err("empty list".into());
    }
    let mut out = Vec::new();
    for s in items {
        let int = |t: &str| t.trim().parse::<u64>().map_err(|_| format!("'{t}' is not a nonnegative integer"));
        match s.split_once("..") {
            Some((a, b)) => {
                let (a, b) = (int(a)?, int(b.trim_start_matches('='))?);
                if b < a {
                    return Err(format!("empty range '{s}'"));
                }
                out.extend(a..=b);
            }
            None => out.push(int(s)?),
        }
    }
    Ok(out)
}

/// Fully parsed experiment parameters.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Plan {
    Perturb {
        c: CProfile,
        q: Vec<f64>,
        a: Vec<f64>,
        q_j: Option<f64>,
        dims: Vec<usize>,
        seeds: Vec<u64>,
        delta: Option<f64>,
        window: Option<(usize, usize)>,
        verdicts: bool,
    },
    Disk {
        levels: Vec<(u32, u32)>,
        seeds: Vec<u64>,
        rank: usize,
        delta: Option<f64>,
        s_scale: f64,
        source_n: u32,
        source_k: u32,
        image_n: u32,
    },
    Criterion {
        n: Vec<u32>,
        eps: Vec<f64>,
    },
    Volterra1d {
        dims: Vec<usize>,
        window: Option<(usize, usize)>,
    },
}

/// Decay law of the diagonal part C.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum CProfile {
    Power(Vec<f64>),
    Log(Vec<f64>),
}

struct Reader<'a> {
    cfg: &'a ExperimentConfig,
    problems: Vec<String>,
}

impl Reader<'_> {
    fn problem(&mut self, key: &str, msg: impl fmt::Display) {
        self.problems.push(format!("{key}: {msg}"));
    }

    fn raw(&mut self, key: &str, required: bool) -> Option<&str> {
        let v = self.cfg.get(key);
        if v.is_none() && required {
            self.problems.push(format!("{key}: missing required key"));
        }
        v
    }

    fn floats(&mut self, key: &str, required: bool, ok: impl Fn(f64) -> bool, what: &str) -> Option<Vec<f64>> {
        let raw = self.raw(key, required)?.to_string();
        match parse_floats(&raw) {
            Ok(v) if v.iter().all(|x| ok(*x)) => Some(v),
            Ok(_) => {
                self.problem(key, format!("every value must be {what}"));
                None
            }
            Err(e) => {
                self.problem(key, e);
                None
            }
        }
    }

    fn float(&mut self, key: &str, ok: impl Fn(f64) -> bool, what: &str) -> Option<f64> {
        let v = self.floats(key, false, ok, what)?;
        if v.len() != 1 {
            self.problem(key, "expected a single value");
            return None;
        }
        Some(v[0])
    }

    fn ints(&mut self, key: &str, required: bool) -> Option<Vec<u64>> {
        let raw = self.raw(key, required)?.to_string();
        match parse_ints(&raw) {
            Ok(v) => Some(v),
            Err(e) => {
                self.problem(key, e);
                None
            }
        }
    }

    fn int(&mut self, key: &str, default: u64) -> u64 {
        match self.ints(key, false) {
            None => default,
            Some(v) if v.len() == 1 => v[0],
            Some(_) => {
                self.problem(key, "expected a single value");
                default
            }
        }
    }

    fn dims(&mut self, key: &str, min: u64, min_levels: usize) -> Option<Vec<usize>> {
        let v = self.ints(key, true)?;
        let before = self.problems.len();
        if v.iter().any(|&d| d < min) {
            self.problem(key, format!("every dimension must be at least {min}"));
        }
        if v.windows(2).any(|w| w[1] <= w[0]) {
            self.problem(key, "must be strictly increasing");
        }
        if v.len() < min_levels {
            self.problem(key, format!("need at least {min_levels} values, got {}", v.len()));
        }
        (self.problems.len() == before).then(|| v.into_iter().map(|d| d as usize).collect())
    }

    fn window(&mut self) -> Option<(usize, usize)> {
        let v = self.ints("window", false)?;
        match v.as_slice() {
            [lo, hi] if *lo >= 2 && lo < hi => Some((*lo as usize, *hi as usize)),
            _ => {
                self.problem("window", "expected two indices lo, hi with 2 <= lo < hi");
                None
            }
        }
    }
}

impl Plan {
    pub(crate) fn resolve(cfg: &ExperimentConfig) -> Result<Plan, Vec<String>> {
        let exp = cfg.experiment;
        let mut r = Reader { cfg, problems: Vec::new() };
        for (key, value) in &cfg.parameters {
            if OUTPUT_KEYS.contains(&key.as_str()) {
                // set() only leaves these in the map when the value was rejected
                r.problem(key, format!("invalid value '{value}'"));
            } else if !exp.required().contains(&key.as_str()) && !exp.optional().contains(&key.as_str()) {
                r.problem(key, format!("unknown key for {exp}"));
            }
        }
        let positive = |x: f64| x > 0.0;
        let plan = match exp {
            Experiment::Snumbers | Experiment::PerturbThm21 | Experiment::PerturbThm23 => {
                let c = match exp {
                    Experiment::PerturbThm21 => {
                        r.floats("alpha", true, |x| x > 0.0 && x < 2.0, "in (0, 2)").map(CProfile::Power)
                    }
                    Experiment::PerturbThm23 => r.floats("beta", true, |x| x < 0.0, "negative").map(CProfile::Log),
                    _ => match (cfg.get("alpha"), cfg.get("beta")) {
                        (Some(_), None) => r.floats("alpha", true, positive, "positive").map(CProfile::Power),
                        (None, Some(_)) => r.floats("beta", true, |x| x < 0.0, "negative").map(CProfile::Log),
                        _ => {
                            r.problem("alpha", "exactly one of alpha or beta is required");
                            None
                        }
                    },
                };
                let q = r.floats("q", true, positive, "positive");
                let a = r.floats("a", false, positive, "positive").or_else(|| Some(vec![1.0]));
                let q_j = r.float("q_j", positive, "positive");
                let verdicts = exp != Experiment::Snumbers;
                let dims = r.dims("dims", 2, if verdicts { 3 } else { 1 });
                let seeds = r.ints("seeds", true);
                let delta = r.float("delta", positive, "positive");
                let window = r.window();
                match (c, q, a, dims, seeds) {
                    (Some(c), Some(q), Some(a), Some(dims), Some(seeds)) => {
                        Some(Plan::Perturb { c, q, a, q_j, dims, seeds, delta, window, verdicts })
                    }
                    _ => None,
                }
            }
            Experiment::DiskRestriction => {
                let n_max = r.ints("n_max", true);
                let k_max = r.ints("k_max", true);
                let seeds = r.ints("seeds", true);
                let rank = r.ints("rank", true);
                let delta = r.float("delta", positive, "positive");
                let s_scale = r.float("s_scale", |x| x > 0.0 && x <= 1.0, "in (0, 1]").unwrap_or(0.5);
                let source_n = r.int("source_n", 2) as u32;
                let source_k = r.int("source_k", 3) as u32;
                let image_n = r.int("image_n", 2) as u32;
                if source_k == 0 {
                    r.problem("source_k", "must be positive");
                }
                let levels = match (n_max, k_max) {
                    (Some(n), Some(k)) if n.len() != k.len() => {
                        r.problem("k_max", "must list as many values as n_max");
                        None
                    }
                    (Some(n), Some(k)) => {
                        let levels: Vec<(u32, u32)> = n.iter().zip(&k).map(|(&a, &b)| (a as u32, b as u32)).collect();
                        let size = |&(n, k): &(u32, u32)| (2 * n as u64 + 1) * k as u64;
                        if levels.len() < 3 {
                            r.problem("n_max", "need at least 3 refinement levels");
                        }
                        if levels.windows(2).any(|w| size(&w[1]) <= size(&w[0])) {
                            r.problem("n_max", "basis sizes must be strictly increasing");
                        }
                        if levels.iter().any(|&(n, k)| n < source_n.max(image_n) || k < source_k) {
                            r.problem("n_max", "every level must contain the source and image modes");
                        }
                        if levels.iter().any(|&(n, _)| n as u64 > vlab_core::disk::bessel::MAX_ORDER as u64) {
                            r.problem(
                                "n_max",
                                format!("orders above {} are not supported", vlab_core::disk::bessel::MAX_ORDER),
                            );
                        }
                        Some(levels)
                    }
                    _ => None,
                };
                let rank = rank.and_then(|v| {
                    let modes = ((2 * source_n + 1) * source_k).min(2 * image_n + 1) as u64;
                    match v.as_slice() {
                        [j] if *j >= 1 && *j <= modes => Some(*j as usize),
                        _ => {
                            r.problem("rank", format!("expected one value in 1..={modes}"));
                            None
                        }
                    }
                });
                match (levels, seeds, rank) {
                    (Some(levels), Some(seeds), Some(rank)) if r.problems.is_empty() => {
                        Some(Plan::Disk { levels, seeds, rank, delta, s_scale, source_n, source_k, image_n })
                    }
                    _ => None,
                }
            }
            Experiment::Criterion => {
                let n = r.ints("n", true);
                if n.as_ref().is_some_and(|v| v.iter().any(|&x| x > 64)) {
                    r.problem("n", "angular orders above 64 are not supported");
                }
                let eps = r.floats("eps_list", true, |x| x > 0.0 && x < 1.0, "in (0, 1)");
                if let Some(e) = &eps {
                    if e.windows(2).any(|w| w[1] >= w[0]) {
                        r.problem("eps_list", "must be strictly decreasing");
                    }
                    if e.len() < MIN_CUTOFFS {
                        r.problem("eps_list", format!("need at least {MIN_CUTOFFS} cutoffs"));
                    }
                }
                match (n, eps) {
                    (Some(n), Some(eps)) => Some(Plan::Criterion { n: n.into_iter().map(|x| x as u32).collect(), eps }),
                    _ => None,
                }
            }
            Experiment::Volterra1d => {
                let dims = r.dims("dims", 8, 1);
                let window = r.window();
                dims.map(|dims| Plan::Volterra1d { dims, window })
            }
        };
        match plan {
            Some(p) if r.problems.is_empty() => Ok(p),
            _ => {
                if r.problems.is_empty() {
                    r.problems.push("configuration could not be resolved".into());
                }
                Err(r.problems)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_ints("1..5").unwrap(), vec![1, 2, 3, 4, 5]);
        assert_eq!(parse_ints("[64, 256,1024]").unwrap(), vec![64, 256, 1024]);
        assert_eq!(parse_ints("1, 3..4").unwrap(), vec![1, 3, 4]);
        assert!(parse_ints("5..1").is_err());
        assert!(parse_ints("").is_err());
        assert_eq!(parse_floats("1e-2, 1e-4").unwrap(), vec![1e-2, 1e-4]);
        assert!(parse_floats("nan").is_err());
    }

    #[test]
    fn comments_and_duplicates() {
        let m = parse_key_values("# sweep\nalpha = 1 # inline\n\nq=2\n").unwrap();
        assert_eq!(m.get("alpha").map(String::as_str), Some("1"));
        assert_eq!(m.get("q").map(String::as_str), Some("2"));
        assert!(matches!(parse_key_values("a=1\na=2"), Err(ConfigError::Syntax { line: 2, .. })));
        assert!(matches!(parse_key_values("novalue"), Err(ConfigError::Syntax { line: 1, .. })));
    }

    #[test]
    fn experiment_names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        assert!("thm99".parse::<Experiment>().is_err());
    }

    #[test]
    fn output_keys_are_not_parameters() {
        let mut c = ExperimentConfig::new(Experiment::Criterion);
        c.set("format", "json").unwrap();
        c.set("output", "x.json").unwrap();
        assert_eq!(c.format, Format::Json);
        assert_eq!(c.output_path, Some(PathBuf::from("x.json")));
        assert!(c.parameters.is_empty());
        assert!(c.set("experiment", "volterra_1d").is_err());
        assert!(c.set("format", "xml").is_err());
    }

    #[test]
    fn disk_levels() {
        let c = ExperimentConfig::new(Experiment::DiskRestriction)
            .with("n_max", "20,30,40")
            .with("k_max", "20,30,40")
            .with("seeds", "1..2")
            .with("rank", "3");
        assert!(c.validate().is_empty(), "{:?}", c.validate());
        let bad = c.clone().with("k_max", "20,30");
        assert!(bad.validate().iter().any(|p| p.starts_with("k_max")));
        let bad = c.clone().with("rank", "9");
        assert!(bad.validate().iter().any(|p| p.starts_with("rank")));
        let bad = c.with("n_max", "1,30,40");
        assert!(bad.validate().iter().any(|p| p.starts_with("n_max")));
    }
}
