//! JSON run configuration.
//!
//! Unknown keys are rejected; every validation error names the offending
//! key. `config.schema.json` at the repository root describes the same
//! format.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bounds::BoundMethod;
use crate::error::{Error, Result};
use crate::model::{ModelKind, ModelSpec, NormMode};

pub const DEFAULT_TRUNCATION: usize = 4;
pub const DEFAULT_CHAIN_N_MAX: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub name: ModelKind,
    pub length: usize,
    #[serde(default)]
    pub truncation: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            start: 0.0,
            stop: 3.0,
            points: 61,
        }
    }
}

impl TimeGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points)
            .map(|k| if k + 1 == self.points { self.stop } else { self.start + step * k as f64 })
            .collect()
    }
}

/// A single-site observable (`{"kind": "z", "site": 3}`) or a Hamiltonian
/// term (`{"kind": "term", "family": 0, "index": 2}`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
}

impl ObservableSpec {
    pub fn site(kind: &str, site: usize) -> Self {
        Self {
            kind: kind.into(),
            site: Some(site),
            family: None,
            index: None,
        }
    }

    pub fn term(family: u8, index: usize) -> Self {
        Self {
            kind: "term".into(),
            site: None,
            family: Some(family),
            index: Some(index),
        }
    }

    pub fn is_term(&self) -> bool {
        self.kind == "term"
    }

    fn validate(&self, key: &str) -> Result<()> {
        let err = |m: &str| Error::Config {
            key: key.to_string(),
            message: m.to_string(),
        };
        if self.is_term() {
            match (self.family, self.index, self.site) {
                (Some(0 | 1), Some(_), None) => Ok(()),
                (Some(_), Some(_), None) => Err(err("family must be 0 or 1")),
                (_, _, Some(_)) => Err(err("a term observable takes family and index, not site")),
                _ => Err(err("a term observable needs family and index")),
            }
        } else if !matches!(self.kind.as_str(), "x" | "y" | "z" | "n" | "p") {
            Err(err("kind must be one of x, y, z, n, p, term"))
        } else if self.site.is_none() || self.family.is_some() || self.index.is_some() {
            Err(err("a single-site observable takes exactly a site"))
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservablesSection {
    pub p: ObservableSpec,
    /// Placements of O_Q; default: the same kind of observable at every
    /// distance beyond R.
    #[serde(default)]
    pub q: Option<Vec<ObservableSpec>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainsSection {
    #[serde(default)]
    pub start: Option<ObservableSpec>,
    #[serde(default)]
    pub target: Option<Vec<usize>>,
    #[serde(default)]
    pub n_max: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_series_tol")]
    pub series_tol: f64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

fn default_series_tol() -> f64 {
    crate::dynamics::DEFAULT_SERIES_TOL
}

fn default_threshold() -> f64 {
    crate::dynamics::DEFAULT_THRESHOLD
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            series_tol: default_series_tol(),
            threshold: default_threshold(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: ModelSection,
    h0: f64,
    #[serde(default)]
    h1: Option<f64>,
    #[serde(default)]
    lambda: Option<f64>,
    #[serde(default)]
    norm_mode: NormMode,
    #[serde(default)]
    t_grid: TimeGrid,
    #[serde(default)]
    observables: Option<ObservablesSection>,
    #[serde(default)]
    methods: Option<Vec<BoundMethod>>,
    #[serde(default)]
    chains: Option<ChainsSection>,
    #[serde(default)]
    tolerances: Tolerances,
    #[serde(default)]
    out: Option<PathBuf>,
}

/// A validated configuration with defaults applied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub model: ModelSpec,
    /// `None` means λ = ξ.
    pub lambda: Option<f64>,
    pub norm_mode: NormMode,
    pub t_grid: TimeGrid,
    pub observables: ObservablesSection,
    pub methods: Vec<BoundMethod>,
    pub chains: ChainsSection,
    pub tolerances: Tolerances,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn times(&self) -> Vec<f64> {
        self.t_grid.values()
    }
}

fn config_err(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| {
        let msg = e.to_string();
        // serde names unknown and missing fields in backticks
        let key = msg
            .split('`')
            .nth(1)
            .filter(|_| msg.contains("field"))
            .unwrap_or("(root)")
            .to_string();
        Error::Config { key, message: msg }
    })?;
    validate(raw)
}

fn positive(key: &str, x: f64) -> Result<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(config_err(key, format!("{key} must be a positive number, got {x}")))
    }
}

fn validate(raw: RawConfig) -> Result<RunConfig> {
    let h0 = positive("h0", raw.h0)?;
    let h1 = match raw.h1 {
        Some(x) => positive("h1", x)?,
        None => h0,
    };
    let m = &raw.model;
    let is_dicke = matches!(m.name, ModelKind::DickeChain | ModelKind::DickeCommuting);
    if m.length < 2 {
        return Err(config_err("model.length", "length must be ≥ 2"));
    }
    let truncation = match (is_dicke, m.truncation) {
        (true, Some(t)) if t < 2 => return Err(config_err("model.truncation", "truncation must be ≥ 2")),
        (true, Some(t)) => t,
        (true, None) => DEFAULT_TRUNCATION,
        (false, Some(_)) => {
            return Err(config_err("model.truncation", "truncation applies to Dicke models only"));
        }
        (false, None) => 0,
    };
    let model = ModelSpec {
        kind: m.name,
        length: m.length,
        truncation,
        h0,
        h1,
    };
    if let Some(l) = raw.lambda {
        positive("lambda", l)?;
    }
    let g = raw.t_grid;
    if g.points == 0 {
        return Err(config_err("t_grid.points", "points must be ≥ 1"));
    }
    if !(g.start.is_finite() && g.stop.is_finite()) || g.stop < g.start {
        return Err(config_err("t_grid", "need finite start <= stop"));
    }

    let observables = raw.observables.unwrap_or_else(|| ObservablesSection {
        p: if is_dicke { ObservableSpec::term(0, 0) } else { ObservableSpec::site("z", 0) },
        q: None,
    });
    observables.p.validate("observables.p")?;
    if let Some(q) = &observables.q {
        if q.is_empty() {
            return Err(config_err("observables.q", "at least one placement is required"));
        }
        for (k, o) in q.iter().enumerate() {
            o.validate(&format!("observables.q[{k}]"))?;
        }
    }

    let methods = raw
        .methods
        .unwrap_or_else(|| vec![BoundMethod::ClosedForm, BoundMethod::SeriesExactCn]);
    if methods.is_empty() {
        return Err(config_err("methods", "at least one method is required"));
    }

    let chains = raw.chains.unwrap_or(ChainsSection {
        start: None,
        target: None,
        n_max: None,
    });
    if let Some(s) = &chains.start {
        s.validate("chains.start")?;
        if !s.is_term() {
            return Err(config_err("chains.start", "chain start must be a term"));
        }
    }
    if matches!(&chains.target, Some(t) if t.is_empty()) {
        return Err(config_err("chains.target", "target region must be nonempty"));
    }

    let tol = raw.tolerances;
    positive("tolerances.series_tol", tol.series_tol)?;
    positive("tolerances.threshold", tol.threshold)?;

    Ok(RunConfig {
        model,
        lambda: raw.lambda,
        norm_mode: raw.norm_mode,
        t_grid: g,
        observables,
        methods,
        chains,
        tolerances: tol,
        out: raw.out.unwrap_or_else(|| PathBuf::from("lrlab-out")),
    })
}
