//! Experiment files: a TOML document holding the weight matrix, initial
//! state, ε levels, and run options. Everything is deterministic — there is
//! no seed field.

use std::fmt;
use std::path::Path;

use consensus_halt::{DetectorKind, NetworkState, ThresholdKind, WeightMatrix};
use serde::Deserialize;

/// How the detector's ε relates to the reported consensus level δ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Detector runs directly at each level: firing certifies δ·D while the
    /// table still scores against δ.
    Table1,
    /// Detector runs at δ/D so that firing certifies the level δ itself.
    Theorem,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Table1 => "table1",
            Mode::Theorem => "theorem",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorChoice {
    Yz,
    MinRounds,
}

impl From<DetectorChoice> for DetectorKind {
    fn from(c: DetectorChoice) -> Self {
        match c {
            DetectorChoice::Yz => DetectorKind::Yz,
            DetectorChoice::MinRounds => DetectorKind::MinRounds,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdChoice {
    Diameter,
    Size,
}

impl From<ThresholdChoice> for ThresholdKind {
    fn from(c: ThresholdChoice) -> Self {
        match c {
            ThresholdChoice::Diameter => ThresholdKind::Diameter,
            ThresholdChoice::Size => ThresholdKind::Size,
        }
    }
}

/// Initial states: a flat list for scalar nodes or one row per node.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum X0 {
    Flat(Vec<f64>),
    Nested(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    weights: Vec<Vec<f64>>,
    x0: X0,
    eps_levels: Vec<f64>,
    #[serde(default = "default_detector")]
    detector: DetectorChoice,
    #[serde(default = "default_threshold")]
    threshold: ThresholdChoice,
    #[serde(default = "default_mode")]
    mode: Mode,
    #[serde(default = "default_max_steps")]
    max_steps: usize,
}

fn default_detector() -> DetectorChoice {
    DetectorChoice::Yz
}

fn default_threshold() -> ThresholdChoice {
    ThresholdChoice::Diameter
}

fn default_mode() -> Mode {
    Mode::Table1
}

fn default_max_steps() -> usize {
    consensus_halt::simulator::DEFAULT_MAX_STEPS
}

/// A fully validated experiment, ready to run.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub weights: WeightMatrix,
    pub x0: NetworkState,
    pub eps_levels: Vec<f64>,
    pub detector: DetectorChoice,
    pub threshold: ThresholdChoice,
    pub mode: Mode,
    pub max_steps: usize,
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let raw: RawExperiment = toml::from_str(text).map_err(|e| e.to_string())?;
        let weights = WeightMatrix::from_rows(&raw.weights).map_err(|e| e.to_string())?;
        let x0 = match raw.x0 {
            X0::Flat(v) => NetworkState::from_scalars(&v),
            X0::Nested(rows) => NetworkState::new(rows),
        }
        .map_err(|e| e.to_string())?;
        if x0.node_count() != weights.n() {
            return Err(format!(
                "x0 has {} nodes but the weight matrix has {}",
                x0.node_count(),
                weights.n()
            ));
        }
        if raw.eps_levels.is_empty() {
            return Err("eps_levels must not be empty".into());
        }
        if let Some(bad) = raw.eps_levels.iter().find(|&&e| e.is_nan() || e <= 0.0) {
            return Err(format!("eps level {bad} is not positive"));
        }
        if raw.max_steps == 0 {
            return Err("max_steps must be at least 1".into());
        }
        Ok(Experiment {
            weights,
            x0,
            eps_levels: raw.eps_levels,
            detector: raw.detector,
            threshold: raw.threshold,
            mode: raw.mode,
            max_steps: raw.max_steps,
        })
    }
}
