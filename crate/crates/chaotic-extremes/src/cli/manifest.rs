//! Run manifests: every data file a command emits is accompanied by a JSON
//! manifest holding the full parameter set, so the run can be reproduced
//! bit-exactly with `--from-manifest`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CliError;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub a: f64,
    pub delta_exp: u32,
    pub alpha: f64,
    pub beta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j_max: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_min: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    /// External measure-model file the run used, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_file: Option<String>,
    pub format: String,
    pub tool_version: String,
    pub wall_time_seconds: f64,
    /// Sup-distance of an empirical a=2 model to the analytic arcsine law.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub supdist: Option<f64>,
    /// Fitted correlation decay rate, when the corr command can resolve one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub varsigma_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub turning_time: Option<u64>,
}

impl RunManifest {
    pub fn new(command: &str, a: f64, delta_exp: u32, alpha: f64, beta: f64) -> Self {
        RunManifest {
            command: command.to_string(),
            a,
            delta_exp,
            alpha,
            beta,
            seed: None,
            n: None,
            m: None,
            trials: None,
            k: None,
            tau: None,
            grid: None,
            j_max: None,
            theta_min: None,
            horizon: None,
            n_samples: None,
            burn_in: None,
            c: None,
            mode: None,
            model_file: None,
            format: "csv".to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_seconds: 0.0,
            supdist: None,
            varsigma_hat: None,
            turning_time: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
