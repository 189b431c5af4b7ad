//! Experiment configuration: JSON files, flag overrides and validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Oracle,
    Solve,
    Sections,
    Growth,
    Cascade,
    Doubling,
    VerifyDual,
    VerifyTranslator,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Oracle,
        Experiment::Solve,
        Experiment::Sections,
        Experiment::Growth,
        Experiment::Cascade,
        Experiment::Doubling,
        Experiment::VerifyDual,
        Experiment::VerifyTranslator,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Oracle => "oracle",
            Experiment::Solve => "solve",
            Experiment::Sections => "sections",
            Experiment::Growth => "growth",
            Experiment::Cascade => "cascade",
            Experiment::Doubling => "doubling",
            Experiment::VerifyDual => "verify-dual",
            Experiment::VerifyTranslator => "verify-translator",
        }
    }

    fn randomized(self) -> bool {
        self == Experiment::Doubling
    }

    /// Function sources the experiment accepts.
    fn sources(self) -> &'static [&'static str] {
        match self {
            Experiment::Growth => &["oracle-dual", "oracle-primal", "quadratic"],
            Experiment::Solve => &["oracle-dual", "quadratic", "separable"],
            Experiment::Sections | Experiment::Cascade => &["oracle-dual", "oracle-primal", "quadratic", "separable", "solve"],
            _ => &[],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DomainSpec {
    Square { half_width: f64 },
    Disk { radius: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelSpec {
    pub t0: f64,
    pub ratio: f64,
    pub n: usize,
}

/// One experiment. Optional fields fall back to per-experiment defaults in [`Config::with_defaults`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub experiment: Experiment,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ascent_rounds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rmin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rmax: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_circles: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<LevelSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalization: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub annulus: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gfn: Option<PathBuf>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_alpha() -> f64 {
    0.125
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Config {
    pub fn source(&self) -> &str {
        self.source.as_deref().unwrap_or("")
    }

    /// Fills every field the experiment uses with its default.
    pub fn with_defaults(mut self) -> Self {
        use Experiment::*;
        let e = self.experiment;
        let src = |c: &Config, d: &str| Some(c.source.clone().unwrap_or_else(|| d.to_string()));
        match e {
            Oracle => {
                self.profile.get_or_insert_with(|| "dual".into());
                self.rmax.get_or_insert(256.0);
                self.n_points.get_or_insert(257);
                if self.gfn.is_some() {
                    self.domain.get_or_insert(DomainSpec::Disk { radius: 8.0 });
                    self.h.get_or_insert(0.5);
                }
            }
            Solve => {
                self.source = src(&self, "oracle-dual");
                self.domain.get_or_insert(DomainSpec::Square { half_width: 1.0 });
                self.h.get_or_insert(0.1);
                self.tolerance.get_or_insert(0.02);
            }
            Sections | Cascade => {
                self.source = src(&self, if e == Sections { "oracle-dual" } else { "separable" });
                self.levels.get_or_insert(LevelSpec { t0: 1.0, ratio: 2.0, n: 8 });
                self.normalization.get_or_insert_with(|| "symmetric".into());
                if self.source() == "solve" {
                    self.domain.get_or_insert(DomainSpec::Disk { radius: 8.0 });
                    self.h.get_or_insert(0.125);
                }
                if e == Sections {
                    self.tolerance.get_or_insert(3.0);
                } else {
                    self.tolerance.get_or_insert(if self.source() == "separable" { 0.05 } else { 0.02 });
                    self.m.get_or_insert(3.0);
                    self.c1.get_or_insert(4.0);
                }
            }
            Growth => {
                self.source = src(&self, "oracle-dual");
                self.rmin.get_or_insert(16.0);
                self.rmax.get_or_insert(256.0);
                self.n_circles.get_or_insert(5);
                self.tolerance.get_or_insert(0.02);
            }
            Doubling => {
                self.rhs.get_or_insert_with(|| "dual".into());
                self.domain.get_or_insert(DomainSpec::Disk { radius: 1.0 });
                self.samples.get_or_insert(1000);
                self.ascent_rounds.get_or_insert(40);
                self.tolerance.get_or_insert(1e-6);
            }
            VerifyDual => {
                self.domain.get_or_insert(DomainSpec::Disk { radius: 8.0 });
                self.h.get_or_insert(0.125);
                self.tolerance.get_or_insert(0.02);
            }
            VerifyTranslator => {
                self.domain.get_or_insert(DomainSpec::Disk { radius: 2.0 });
                self.h.get_or_insert(0.02);
                self.annulus.get_or_insert([0.5, 1.5]);
                self.tolerance.get_or_insert(0.03);
            }
        }
        if matches!(e, Solve | Sections | Cascade | VerifyDual) && self.h.is_some() {
            // The degenerate right-hand side has targets near roundoff on the axis.
            self.tol.get_or_insert(if self.source() == "separable" { 1e-4 } else { 1e-8 });
            self.max_iters.get_or_insert(1_000_000_000);
            self.scheme.get_or_insert_with(|| "newton".into());
        }
        let uses_eta = matches!(e, Oracle | VerifyDual | Doubling) || matches!(self.source(), "oracle-dual" | "solve");
        if uses_eta {
            self.eta.get_or_insert(1.0);
        }
        if self.source() == "separable" {
            self.a.get_or_insert(1.0);
        }
        self
    }
}

/// A schema violation at a JSON pointer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub pointer: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let p = if self.pointer.is_empty() { "/" } else { &self.pointer };
        write!(f, "{p}: {}", self.message)
    }
}

#[derive(Debug)]
pub enum ConfigError {
    Io(PathBuf, std::io::Error),
    Parse(String),
    Invalid(Vec<Violation>),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Io(p, e) => write!(f, "cannot read {}: {e}", p.display()),
            ConfigError::Parse(e) => write!(f, "config is not valid JSON: {e}"),
            ConfigError::Invalid(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "invalid config: {}", parts.join("; "))
            }
        }
    }
}

impl std::error::Error for ConfigError {}

pub fn read_json(path: &Path) -> Result<Value, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_path_buf(), e))?;
    serde_json::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))
}

const FIELDS: &[&str] = &[
    "experiment", "alpha", "eta", "source", "profile", "domain", "h", "tol", "max_iters", "scheme", "seed", "samples", "ascent_rounds", "rhs",
    "a", "rmin", "rmax", "n_circles", "n_points", "levels", "normalization", "m", "c1", "annulus", "tolerance", "gfn", "output_dir",
];

struct Checker<'a> {
    obj: &'a Map<String, Value>,
    out: Vec<Violation>,
}

impl Checker<'_> {
    fn push(&mut self, pointer: impl Into<String>, message: impl Into<String>) {
        self.out.push(Violation { pointer: pointer.into(), message: message.into() });
    }

    fn number(&mut self, key: &str) -> Option<f64> {
        let v = self.obj.get(key)?;
        match v.as_f64() {
            Some(x) => Some(x),
            None => {
                self.push(format!("/{key}"), "must be a number");
                None
            }
        }
    }

    fn positive(&mut self, key: &str) {
        if let Some(x) = self.number(key) {
            if !(x > 0.0) {
                self.push(format!("/{key}"), format!("{key} must be > 0"));
            }
        }
    }

    fn integer(&mut self, key: &str, min: u64) {
        if let Some(v) = self.obj.get(key) {
            match v.as_u64() {
                Some(x) if x >= min => {}
                _ => self.push(format!("/{key}"), format!("{key} must be an integer >= {min}")),
            }
        }
    }

    fn one_of(&mut self, key: &str, allowed: &[&str]) {
        if let Some(v) = self.obj.get(key) {
            match v.as_str() {
                Some(s) if allowed.contains(&s) => {}
                _ => self.push(format!("/{key}"), format!("{key} must be one of: {}", allowed.join(", "))),
            }
        }
    }
}

/// Schema violations of a config given as JSON; empty iff [`Config`] parsing and running would accept it.
pub fn validate_value(v: &Value) -> Vec<Violation> {
    let Some(obj) = v.as_object() else {
        return vec![Violation { pointer: String::new(), message: "config must be a JSON object".into() }];
    };
    let mut c = Checker { obj, out: Vec::new() };
    for k in obj.keys() {
        if !FIELDS.contains(&k.as_str()) {
            c.push(format!("/{k}"), "unknown field");
        }
    }
    let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
    let exp = match obj.get("experiment") {
        None => {
            c.push("/experiment", "experiment is required");
            None
        }
        Some(v) => match v.as_str().and_then(|s| Experiment::ALL.into_iter().find(|e| e.name() == s)) {
            Some(e) => Some(e),
            None => {
                c.push("/experiment", format!("experiment must be one of: {}", names.join(", ")));
                None
            }
        },
    };

    if let Some(a) = c.number("alpha") {
        if !(a > 0.0) {
            c.push("/alpha", "alpha must be > 0");
        } else if !(a < 0.25) {
            c.push("/alpha", "alpha must be < 0.25");
        }
    }
    if let Some(e) = c.number("eta") {
        if !(0.0..=1.0).contains(&e) {
            c.push("/eta", "eta must lie in [0, 1]");
        }
    }
    for key in ["h", "tol", "a", "rmin", "rmax", "m", "c1", "tolerance"] {
        c.positive(key);
    }
    c.integer("max_iters", 1);
    c.integer("seed", 0);
    c.integer("samples", 100);
    c.integer("ascent_rounds", 0);
    c.integer("n_circles", 4);
    c.integer("n_points", 2);
    c.one_of("profile", &["primal", "dual"]);
    c.one_of("scheme", &["newton", "oliker-prussner"]);
    c.one_of("rhs", &["constant", "dual", "degenerate"]);
    c.one_of("normalization", &["symmetric", "q-lambda"]);
    for key in ["gfn", "output_dir"] {
        if obj.get(key).is_some_and(|v| !v.is_string()) {
            c.push(format!("/{key}"), "must be a string path");
        }
    }
    if let (Some(lo), Some(hi)) = (obj.get("rmin").and_then(Value::as_f64), obj.get("rmax").and_then(Value::as_f64)) {
        if lo > 0.0 && !(hi > lo) {
            c.push("/rmax", "rmax must be > rmin");
        }
    }

    if let Some(d) = obj.get("domain") {
        match d.as_object() {
            None => c.push("/domain", "domain must be an object"),
            Some(d) => {
                let size = match d.get("kind").and_then(Value::as_str) {
                    Some("square") => Some("half_width"),
                    Some("disk") => Some("radius"),
                    _ => {
                        c.push("/domain/kind", "kind must be one of: square, disk");
                        None
                    }
                };
                if let Some(size) = size {
                    match d.get(size).and_then(Value::as_f64) {
                        Some(x) if x > 0.0 => {}
                        Some(_) => c.push(format!("/domain/{size}"), format!("{size} must be > 0")),
                        None => c.push(format!("/domain/{size}"), format!("{size} is required")),
                    }
                    for k in d.keys() {
                        if k != "kind" && k != size {
                            c.push(format!("/domain/{k}"), "unknown field");
                        }
                    }
                }
            }
        }
    }

    if let Some(l) = obj.get("levels") {
        match l.as_object() {
            None => c.push("/levels", "levels must be an object"),
            Some(l) => {
                for k in l.keys() {
                    if !["t0", "ratio", "n"].contains(&k.as_str()) {
                        c.push(format!("/levels/{k}"), "unknown field");
                    }
                }
                match l.get("t0").and_then(Value::as_f64) {
                    Some(x) if x > 0.0 => {}
                    _ => c.push("/levels/t0", "t0 must be a number > 0"),
                }
                match l.get("ratio").and_then(Value::as_f64) {
                    Some(x) if x > 1.0 => {}
                    _ => c.push("/levels/ratio", "ratio must be a number > 1"),
                }
                match l.get("n").and_then(Value::as_u64) {
                    Some(x) if x >= 2 => {}
                    _ => c.push("/levels/n", "n must be an integer >= 2"),
                }
            }
        }
    }

    if let Some(a) = obj.get("annulus") {
        match a.as_array().map(|v| v.iter().map(Value::as_f64).collect::<Vec<_>>()) {
            Some(v) if v.len() == 2 && v.iter().all(Option::is_some) => {
                let (lo, hi) = (v[0].unwrap(), v[1].unwrap());
                if !(lo >= 0.0 && hi > lo) {
                    c.push("/annulus", "annulus must satisfy 0 <= inner < outer");
                }
            }
            _ => c.push("/annulus", "annulus must be [inner, outer]"),
        }
    }

    if let Some(e) = exp {
        if e.randomized() && obj.get("seed").is_none() {
            c.push("/seed", format!("seed is required for the {} experiment", e.name()));
        }
        if obj.contains_key("source") {
            let allowed = e.sources();
            if allowed.is_empty() {
                c.push("/source", format!("source is not used by the {} experiment", e.name()));
            } else {
                c.one_of("source", allowed);
            }
        }
    }
    c.out
}

/// Parses, validates and fills defaults.
pub fn config_from_value(v: Value) -> Result<Config, ConfigError> {
    let violations = validate_value(&v);
    if !violations.is_empty() {
        return Err(ConfigError::Invalid(violations));
    }
    let cfg: Config = serde_json::from_value(v).map_err(|e| ConfigError::Parse(e.to_string()))?;
    Ok(cfg.with_defaults())
}

/// Violations of the config file at `path`; read and parse failures are reported at the root.
pub fn validate_config(path: &Path) -> Vec<Violation> {
    match read_json(path) {
        Ok(v) => validate_value(&v),
        Err(e) => vec![Violation { pointer: String::new(), message: e.to_string() }],
    }
}
