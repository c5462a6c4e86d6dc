//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "dim": 3,
//!   "horizon": 40,
//!   "ptype": "B",
//!   "generator": { "preset": "minorized", "lambda": 0.3, "k0": 1 },
//!   "iid": true,
//!   "x0": "uniform",
//!   "seed": 42,
//!   "diagnostics": ["kc", "trajectory", "defects", "equivalence", "minorization", "oscillation"],
//!   "threshold": 0.001,
//!   "output": "out/minorized"
//! }
//! ```
//!
//! Omitted fields take the defaults below; the resolved config (defaults
//! included) is echoed into every summary.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{QspError, Result};
use crate::generators::GeneratorPreset;
use crate::qsp::{BuildOptions, ProcessType, MAX_HORIZON};
use crate::simplex::{ProbVector, Tolerances, MAX_DIM};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Diagnostic {
    Consistency,
    Trajectory,
    Kc,
    Defects,
    Equivalence,
    Minorization,
    Oscillation,
}

impl Diagnostic {
    pub const ALL: [Diagnostic; 7] = [
        Diagnostic::Consistency,
        Diagnostic::Trajectory,
        Diagnostic::Kc,
        Diagnostic::Defects,
        Diagnostic::Equivalence,
        Diagnostic::Minorization,
        Diagnostic::Oscillation,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Keyword {
    Uniform,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialPoint {
    Named(Keyword),
    Explicit(Vec<f64>),
}

impl Default for InitialPoint {
    fn default() -> Self {
        InitialPoint::Named(Keyword::Uniform)
    }
}

impl InitialPoint {
    pub fn resolve(&self, dim: usize, tol: &Tolerances) -> Result<ProbVector> {
        match self {
            InitialPoint::Named(Keyword::Uniform) => ProbVector::uniform(dim),
            InitialPoint::Explicit(v) => {
                if v.len() != dim {
                    return Err(QspError::Config(format!("x0 has length {}, expected {dim}", v.len())));
                }
                ProbVector::with_tolerances(v.clone(), tol).map_err(|e| QspError::Config(format!("x0: {e}")))
            }
        }
    }
}

/// Simplex tolerances plus the limits used for asserted invariants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    pub sum: f64,
    pub entry: f64,
    pub kc: f64,
    pub trajectory: f64,
    pub consistency: f64,
    pub oscillation: f64,
    pub recursion: f64,
    /// Slack for the pair/Markov and q.s.p./R defect bounds.
    pub bound_slack: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        let base = Tolerances::default();
        Self {
            sum: base.sum,
            entry: base.entry,
            kc: 1e-10,
            trajectory: 1e-10,
            consistency: 1e-10,
            oscillation: 1e-10,
            recursion: 1e-10,
            bound_slack: 1e-12,
        }
    }
}

impl ToleranceConfig {
    pub fn simplex(&self) -> Tolerances {
        Tolerances { sum: self.sum, entry: self.entry }
    }
}

fn default_ptype() -> ProcessType {
    ProcessType::TypeA
}
fn default_true() -> bool {
    true
}
fn default_diagnostics() -> Vec<Diagnostic> {
    Diagnostic::ALL.to_vec()
}
fn default_threshold() -> f64 {
    1e-3
}
fn default_sample_count() -> usize {
    16
}
fn default_max_horizon() -> usize {
    MAX_HORIZON
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub horizon: usize,
    #[serde(default = "default_ptype")]
    pub ptype: ProcessType,
    pub generator: GeneratorPreset,
    /// Fresh draw per step; `false` reuses the step-1 kernel.
    #[serde(default = "default_true")]
    pub iid: bool,
    #[serde(default)]
    pub x0: InitialPoint,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_diagnostics")]
    pub diagnostics: Vec<Diagnostic>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Start time `m` of the defect series.
    #[serde(default)]
    pub start: usize,
    /// Random simplex points used for R-defects and pair defects.
    #[serde(default = "default_sample_count")]
    pub sample_count: usize,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
    #[serde(default = "default_max_horizon")]
    pub max_horizon: usize,
    #[serde(default)]
    pub record_wall_clock: bool,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| QspError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| QspError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// A config with every optional field at its default.
    pub fn new(dim: usize, horizon: usize, ptype: ProcessType, generator: GeneratorPreset, seed: u64) -> Self {
        Self {
            dim,
            horizon,
            ptype,
            generator,
            iid: true,
            x0: InitialPoint::default(),
            seed: Some(seed),
            diagnostics: default_diagnostics(),
            threshold: default_threshold(),
            start: 0,
            sample_count: default_sample_count(),
            tolerances: ToleranceConfig::default(),
            max_horizon: MAX_HORIZON,
            record_wall_clock: false,
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=MAX_DIM).contains(&self.dim) {
            return Err(QspError::Config(format!("dim must be in 2..={MAX_DIM}, got {}", self.dim)));
        }
        if self.horizon < 2 || self.horizon > self.max_horizon {
            return Err(QspError::Config(format!("horizon must be in 2..={}, got {}", self.max_horizon, self.horizon)));
        }
        if self.generator.is_randomized() && self.seed.is_none() {
            return Err(QspError::Config(format!("preset {} is randomized and needs a seed", self.generator.name())));
        }
        if self.threshold.is_nan() || self.threshold <= 0.0 {
            return Err(QspError::Config(format!("threshold must be positive, got {}", self.threshold)));
        }
        if self.start >= self.horizon {
            return Err(QspError::Config(format!("start {} must be below horizon {}", self.start, self.horizon)));
        }
        let t = &self.tolerances;
        let all = [t.sum, t.entry, t.kc, t.trajectory, t.consistency, t.oscillation, t.recursion, t.bound_slack];
        if all.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(QspError::Config("tolerances must be finite and nonnegative".into()));
        }
        self.generator.validate(self.dim)?;
        self.x0.resolve(self.dim, &self.tolerances.simplex())?;
        Ok(())
    }

    pub fn wants(&self, d: Diagnostic) -> bool {
        self.diagnostics.contains(&d)
    }

    pub fn seed_or_zero(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn build_options(&self) -> BuildOptions {
        BuildOptions { tolerances: self.tolerances.simplex(), max_horizon: self.max_horizon }
    }
}
