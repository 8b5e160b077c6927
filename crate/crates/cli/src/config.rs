//! The resolved run configuration echoed into every output directory.

use std::path::Path;

use serde::Serialize;

use crate::error::CliError;
use crate::io::write_file;

pub const CONFIG_FILE: &str = "config.json";

/// Every setting a command ran with, after defaults were applied.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_path: Option<String>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket_rule: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node_correction: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge_correction: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_start: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<usize>,
    pub out: String,
    pub jobs: usize,
}

impl RunConfig {
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self).expect("config serializes");
        text.push('\n');
        write_file(&dir.join(CONFIG_FILE), &text)
    }
}
