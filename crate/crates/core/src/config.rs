//! Experiment configuration (a single JSON document).

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::design::{DecayExponent, DesignParams, LinearSystem, DEFAULT_LAMBDA_RATIO};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::sim::DisturbanceSpec;

pub const DEFAULT_INTEGRATOR_DIVISOR: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    #[serde(default)]
    pub lyapunov: LyapunovConfig,
    pub trigger: TriggerSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationConfig>,
    #[serde(default)]
    pub outputs: OutputsConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(rename = "A")]
    pub a: Matrix,
    #[serde(rename = "B")]
    pub b: Matrix,
    #[serde(rename = "K")]
    pub k: Matrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedMatrix {
    Identity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QSpec {
    Named(NamedMatrix),
    Explicit(Matrix),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LyapunovConfig {
    #[serde(rename = "Q", default = "default_q")]
    pub q: QSpec,
    #[serde(default = "default_lambda_ratio")]
    pub lambda_ratio: f64,
}

fn default_q() -> QSpec {
    QSpec::Named(NamedMatrix::Identity)
}

fn default_lambda_ratio() -> f64 {
    DEFAULT_LAMBDA_RATIO
}

impl Default for LyapunovConfig {
    fn default() -> Self {
        Self {
            q: default_q(),
            lambda_ratio: default_lambda_ratio(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Auto {
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TauMinSpec {
    Auto(Auto),
    Value(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriggerSection {
    pub delta: f64,
    pub tau_max: f64,
    #[serde(default = "default_tau_min")]
    pub tau_min: TauMinSpec,
    #[serde(default)]
    pub decay_exponent: DecayExponent,
}

fn default_tau_min() -> TauMinSpec {
    TauMinSpec::Auto(Auto::Auto)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub x0: Vec<f64>,
    pub t_end: f64,
    #[serde(default = "default_divisor")]
    pub integrator_divisor: usize,
    #[serde(default)]
    pub disturbance: DisturbanceSpec,
}

fn default_divisor() -> usize {
    DEFAULT_INTEGRATOR_DIVISOR
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    #[serde(default = "default_directory")]
    pub directory: String,
    #[serde(default)]
    pub emit_plots: bool,
}

fn default_directory() -> String {
    "out".into()
}

impl Default for OutputsConfig {
    fn default() -> Self {
        Self {
            directory: default_directory(),
            emit_plots: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            context: format!("reading config {}", path.display()),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|source| Error::Json {
            context: "parsing config".into(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Dimension consistency and parameter ranges. Stability of the closed
    /// loop is a design-stage check.
    pub fn validate(&self) -> Result<()> {
        let sys = self.system_unchecked()?;
        let m = sys.m();
        if let QSpec::Explicit(q) = &self.lyapunov.q {
            if q.rows() != m || q.cols() != m {
                return Err(Error::Config(format!("Q must be {m}x{m}")));
            }
        }
        let t = &self.trigger;
        if !(t.delta > 0.0 && t.delta.is_finite()) {
            return Err(Error::Config(format!("trigger.delta must be positive, got {}", t.delta)));
        }
        if !(t.tau_max >= t.delta && t.tau_max.is_finite()) {
            return Err(Error::Config(format!(
                "trigger.tau_max must be at least delta, got {}",
                t.tau_max
            )));
        }
        if let Some(sim) = &self.simulation {
            if sim.x0.len() != m {
                return Err(Error::Config(format!(
                    "simulation.x0 has {} entries, expected {m}",
                    sim.x0.len()
                )));
            }
            if !(sim.t_end > 0.0 && sim.t_end.is_finite()) {
                return Err(Error::Config("simulation.t_end must be positive".into()));
            }
            if sim.integrator_divisor == 0 {
                return Err(Error::Config("simulation.integrator_divisor must be >= 1".into()));
            }
            sim.disturbance.validate()?;
        }
        Ok(())
    }

    pub fn system_unchecked(&self) -> Result<LinearSystem> {
        LinearSystem::new_unchecked(self.system.a.clone(), self.system.b.clone(), self.system.k.clone())
            .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn q_matrix(&self, m: usize) -> Matrix {
        match &self.lyapunov.q {
            QSpec::Named(NamedMatrix::Identity) => Matrix::identity(m),
            QSpec::Explicit(q) => q.clone(),
        }
    }

    pub fn design_params(&self) -> DesignParams {
        let m = self.system.a.rows();
        DesignParams {
            q: Some(self.q_matrix(m)),
            lambda_ratio: self.lyapunov.lambda_ratio,
            delta: self.trigger.delta,
            tau_max: self.trigger.tau_max,
            tau_min: match self.trigger.tau_min {
                TauMinSpec::Auto(_) => None,
                TauMinSpec::Value(v) => Some(v),
            },
            decay: self.trigger.decay_exponent,
        }
    }

    pub fn simulation(&self) -> Result<&SimulationConfig> {
        self.simulation
            .as_ref()
            .ok_or_else(|| Error::Config("config has no simulation section".into()))
    }

    /// SHA-256 over the canonical JSON of the design-relevant sections
    /// (system, lyapunov, trigger).
    pub fn design_hash(&self) -> String {
        let canonical = serde_json::to_vec(&(&self.system, &self.lyapunov, &self.trigger))
            .expect("config sections serialize");
        hex::encode(Sha256::digest(&canonical))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCALAR: &str = r#"{
        "system": {"A": [[0.0]], "B": [[1.0]], "K": [[-1.0]]},
        "lyapunov": {"Q": "identity", "lambda_ratio": 0.5},
        "trigger": {"delta": 0.1, "tau_max": 3.0, "tau_min": "auto", "decay_exponent": 2},
        "simulation": {"x0": [1.0], "t_end": 10.0,
                       "disturbance": {"kind": "sinusoid", "amplitude": 0.1, "frequency": 0.5, "seed": 3}},
        "outputs": {"directory": "out", "emit_plots": true}
    }"#;

    #[test]
    fn parses_full_document() {
        let cfg = ExperimentConfig::from_json(SCALAR).unwrap();
        assert_eq!(cfg.lyapunov.lambda_ratio, 0.5);
        assert_eq!(cfg.trigger.tau_min, TauMinSpec::Auto(Auto::Auto));
        assert_eq!(cfg.simulation.as_ref().unwrap().integrator_divisor, 20);
        assert!(cfg.outputs.emit_plots);
        assert_eq!(cfg.q_matrix(1), Matrix::identity(1));
    }

    #[test]
    fn defaults_and_explicit_values() {
        let cfg = ExperimentConfig::from_json(
            r#"{"system": {"A": [[0.0]], "B": [[1.0]], "K": [[-1.0]]},
                "lyapunov": {"Q": [[2.0]]},
                "trigger": {"delta": 0.1, "tau_max": 3.0, "tau_min": 1.2, "decay_exponent": 1}}"#,
        )
        .unwrap();
        assert_eq!(cfg.lyapunov.lambda_ratio, DEFAULT_LAMBDA_RATIO);
        assert_eq!(cfg.q_matrix(1), Matrix::scalar(2.0));
        assert_eq!(cfg.trigger.tau_min, TauMinSpec::Value(1.2));
        assert_eq!(cfg.trigger.decay_exponent, DecayExponent::One);
        assert!(cfg.simulation.is_none());
    }

    #[test]
    fn rejects_unknown_keys_and_bad_dims() {
        let bad = SCALAR.replace("\"lambda_ratio\"", "\"lambda_rate\"");
        assert!(matches!(ExperimentConfig::from_json(&bad), Err(Error::Json { .. })));
        let bad = SCALAR.replace("\"x0\": [1.0]", "\"x0\": [1.0, 2.0]");
        assert!(matches!(ExperimentConfig::from_json(&bad), Err(Error::Config(_))));
        let bad = SCALAR.replace("\"K\": [[-1.0]]", "\"K\": [[-1.0, 0.0]]");
        assert!(matches!(ExperimentConfig::from_json(&bad), Err(Error::Config(_))));
        let bad = SCALAR.replace("\"decay_exponent\": 2", "\"decay_exponent\": 3");
        assert!(ExperimentConfig::from_json(&bad).is_err());
    }

    #[test]
    fn hash_ignores_simulation_section() {
        let a = ExperimentConfig::from_json(SCALAR).unwrap();
        let mut b = a.clone();
        b.simulation.as_mut().unwrap().x0 = vec![3.0];
        assert_eq!(a.design_hash(), b.design_hash());
        b.trigger.delta = 0.05;
        assert_ne!(a.design_hash(), b.design_hash());
        assert_eq!(a.design_hash().len(), 64);
    }
}
