//! Strict TOML run configuration.
//!
//! ```toml
//! N = 16
//! alpha = 0.2
//! delta = 0.3
//! backend = "all"
//!
//! [model]
//! kind = "harmonic"
//! omega = 1.0
//!
//! [times]
//! start = 0.0
//! stop = 5.0
//! count = 11
//!
//! [initial_state]
//! kind = "bare"
//! m = 1
//! sector = "g"
//! ```

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::algebra::{build_operators, build_spectrum, JCParams, ModelKind, OperatorBundle, ShapeInvariantModel};
use crate::error::{Error, Result};
use crate::evolution::linspace;
use crate::inversion::Backend;
use crate::linalg::{c, Basis, CVec};
use crate::spectrum::{dressed_state, Branch};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendChoice {
    Series,
    Quadrature,
    HoClosedForm,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Times {
    Grid { start: f64, stop: f64, count: usize },
    List { list: Vec<f64> },
}

impl Times {
    pub fn points(&self) -> Vec<f64> {
        match self {
            Times::Grid { start, count: 1, .. } => vec![*start],
            Times::Grid { start, stop, count } => linspace(*start, *stop, *count),
            Times::List { list } => list.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    E,
    G,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialState {
    /// `g_0`: atom in its ground state, field in its lowest level.
    Ground,
    Bare { m: usize, sector: Sector },
    Dressed { m: usize, branch: Branch },
    /// Explicit amplitudes over `(e_0..e_{N-1}, g_0..g_{N-1})`; normalized on use.
    Amplitudes {
        re: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        im: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OutputSpec {
    #[serde(default)]
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

fn default_hbar() -> f64 {
    1.0
}
fn default_backend() -> BackendChoice {
    BackendChoice::Series
}
fn default_order() -> usize {
    crate::inversion::series::DEFAULT_ORDER
}
fn default_tol() -> f64 {
    1e-10
}
fn default_state() -> InitialState {
    InitialState::Ground
}

/// Scalars come before tables so the struct serializes back to valid TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(rename = "N")]
    pub n: usize,
    pub alpha: f64,
    pub delta: f64,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    #[serde(default = "default_backend")]
    pub backend: BackendChoice,
    #[serde(default = "default_order")]
    pub series_order: usize,
    #[serde(default = "default_tol")]
    pub quadrature_tol: f64,
    pub model: ModelKind,
    pub times: Times,
    #[serde(default = "default_state")]
    pub initial_state: InitialState,
    #[serde(default)]
    pub output: OutputSpec,
}

const TOP_KEYS: &[&str] = &[
    "N",
    "alpha",
    "delta",
    "hbar",
    "backend",
    "series_order",
    "quadrature_tol",
    "model",
    "times",
    "initial_state",
    "output",
];

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn check_keys(table: &Table, allowed: &[&str], prefix: &str) -> Result<()> {
    for key in table.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::UnknownKey(format!("{prefix}{key}")));
        }
    }
    Ok(())
}

fn sub_table<'a>(root: &'a Table, key: &str) -> Option<&'a Table> {
    root.get(key).and_then(Value::as_table)
}

/// Reject keys that no configuration field accepts.
fn precheck(root: &Table) -> Result<()> {
    check_keys(root, TOP_KEYS, "")?;
    if let Some(m) = sub_table(root, "model") {
        let allowed: &[&str] = match m.get("kind").and_then(Value::as_str) {
            Some("harmonic") => &["kind", "omega"],
            Some("self_similar") => &["kind", "r1", "q"],
            Some("explicit") => &["kind", "remainders"],
            _ => &["kind", "omega", "r1", "q", "remainders"],
        };
        check_keys(m, allowed, "model.")?;
    }
    if let Some(t) = sub_table(root, "times") {
        check_keys(t, &["start", "stop", "count", "list"], "times.")?;
    }
    if let Some(s) = sub_table(root, "initial_state") {
        let allowed: &[&str] = match s.get("kind").and_then(Value::as_str) {
            Some("ground") => &["kind"],
            Some("bare") => &["kind", "m", "sector"],
            Some("dressed") => &["kind", "m", "branch"],
            Some("amplitudes") => &["kind", "re", "im"],
            _ => &["kind", "m", "sector", "branch", "re", "im"],
        };
        check_keys(s, allowed, "initial_state.")?;
    }
    if let Some(o) = sub_table(root, "output") {
        check_keys(o, &["format", "path"], "output.")?;
    }
    Ok(())
}

fn invalid(field: &str, reason: impl Into<String>) -> Error {
    Error::ValidationError { field: field.to_string(), reason: reason.into() }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let root: Table = toml::from_str(text).map_err(|e| Error::ParseError {
        line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
        message: e.message().to_string(),
    })?;
    precheck(&root)?;
    let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::ParseError {
        line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
        message: e.message().to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration always serializes")
    }

    pub fn model(&self) -> ShapeInvariantModel {
        ShapeInvariantModel { kind: self.model.clone(), hbar: self.hbar }
    }

    pub fn params(&self) -> Result<JCParams> {
        JCParams::new(self.alpha, self.delta, self.hbar)
    }

    pub fn bundle(&self) -> Result<OperatorBundle> {
        let spectrum = build_spectrum(&self.model(), self.n)?;
        Ok(build_operators(Arc::new(spectrum), self.params()?))
    }

    /// Backends to run, in output order. `all` skips the closed form on
    /// non-harmonic models.
    pub fn backends(&self) -> Vec<Backend> {
        let series = Backend::Series { order: self.series_order };
        let quad = Backend::Quadrature { tol: self.quadrature_tol };
        match self.backend {
            BackendChoice::Series => vec![series],
            BackendChoice::Quadrature => vec![quad],
            BackendChoice::HoClosedForm => vec![Backend::HoClosedForm],
            BackendChoice::All if self.model().is_harmonic() => vec![series, quad, Backend::HoClosedForm],
            BackendChoice::All => vec![series, quad],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(invalid("N", format!("need N >= 2, got {}", self.n)));
        }
        if self.alpha == 0.0 || !self.alpha.is_finite() {
            return Err(invalid("alpha", "must be nonzero and finite"));
        }
        if !self.delta.is_finite() {
            return Err(invalid("delta", "must be finite"));
        }
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(invalid("hbar", "must be positive"));
        }
        if !(self.quadrature_tol > 0.0) {
            return Err(invalid("quadrature_tol", "must be positive"));
        }
        build_spectrum(&self.model(), self.n).map_err(|e| invalid("model", e.to_string()))?;
        match &self.times {
            Times::Grid { start, stop, count } => {
                if *count == 0 {
                    return Err(invalid("times", "count must be at least 1"));
                }
                if !start.is_finite() || !stop.is_finite() {
                    return Err(invalid("times", "start and stop must be finite"));
                }
                if stop < start || (*count > 1 && stop == start) {
                    return Err(invalid("times", format!("stop {stop} must exceed start {start}")));
                }
            }
            Times::List { list } => {
                if list.is_empty() {
                    return Err(invalid("times", "list must not be empty"));
                }
                if list.iter().any(|t| !t.is_finite()) || list.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(invalid("times", "list must be finite and strictly increasing"));
                }
            }
        }
        self.initial_vector().map(|_| ())
    }

    /// The normalized initial state as a `2N` vector.
    pub fn initial_vector(&self) -> Result<CVec> {
        let n = self.n;
        let basis = Basis::new(n);
        match &self.initial_state {
            InitialState::Ground => Ok(basis.unit(basis.g(0))),
            InitialState::Bare { m, sector } => {
                if *m >= n {
                    return Err(invalid("initial_state", format!("level {m} outside 0..{n}")));
                }
                Ok(basis.unit(match sector {
                    Sector::E => basis.e(*m),
                    Sector::G => basis.g(*m),
                }))
            }
            InitialState::Dressed { m, branch } => {
                let spectrum = build_spectrum(&self.model(), n).map_err(|e| invalid("model", e.to_string()))?;
                let params = self.params().map_err(|e| invalid("alpha", e.to_string()))?;
                dressed_state(*m, &spectrum, &params, *branch).map_err(|e| invalid("initial_state", e.to_string()))
            }
            InitialState::Amplitudes { re, im } => {
                if re.len() != 2 * n || im.as_ref().is_some_and(|v| v.len() != 2 * n) {
                    return Err(invalid("initial_state", format!("need {} amplitudes", 2 * n)));
                }
                let v = CVec::from_fn(2 * n, |i, _| {
                    c(re[i]) + crate::linalg::I * im.as_ref().map_or(0.0, |v| v[i])
                });
                let norm = v.norm();
                if !(norm > 0.0 && norm.is_finite()) {
                    return Err(invalid("initial_state", "amplitudes are not normalizable"));
                }
                Ok(v.unscale(norm))
            }
        }
    }
}
