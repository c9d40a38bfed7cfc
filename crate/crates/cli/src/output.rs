//! Run manifest and CSV tables.
//!
//! Every table uses a fixed column order. Missing values are written as
//! empty cells so that one schema serves all subcommands.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{Command, ExperimentConfig};
use crate::error::CliError;

pub const MANIFEST: &str = "manifest.json";
pub const RESULTS: &str = "results.csv";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Running,
    Ok,
    Failed,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Command,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<serde_json::Value>,
}

impl Manifest {
    pub fn new(command: Command, seed: u64, config: ExperimentConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            config,
            status: Status::Running,
            error: None,
            outputs: vec![RESULTS.to_string()],
            summary: None,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join(MANIFEST);
        let mut text = serde_json::to_string_pretty(self).expect("manifest is always serializable");
        text.push('\n');
        std::fs::write(&path, text).map_err(|source| CliError::Output { path, source })
    }
}

/// One row of the per-`p` table shared by `analytic`, `simulate` and `compare`.
#[derive(Debug, Default, Serialize)]
pub struct PRow {
    pub p: f64,
    pub u: Option<f64>,
    #[serde(rename = "S")]
    pub s: Option<f64>,
    #[serde(rename = "S_tilde")]
    pub s_tilde: Option<f64>,
    #[serde(rename = "S_hat")]
    pub s_hat: Option<f64>,
    #[serde(rename = "S_mc_mean")]
    pub s_mc_mean: Option<f64>,
    #[serde(rename = "S_mc_stderr")]
    pub s_mc_stderr: Option<f64>,
    pub second_largest_mean: Option<f64>,
    #[serde(rename = "S_hat_mc_mean")]
    pub s_hat_mc_mean: Option<f64>,
    /// Edge consistency solution of the transformed network.
    pub u_tilde: Option<f64>,
    /// `S_mc_mean` minus the analytic prediction for the same network.
    pub deviation: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct StrategyRow {
    pub q: usize,
    pub p_c: Option<f64>,
    pub gain: Option<f64>,
    pub included: bool,
}

#[derive(Debug, Default, Serialize)]
pub struct GainRow {
    pub x: f64,
    pub p_c: Option<f64>,
    pub p_c_2: Option<f64>,
    pub p_c_23: Option<f64>,
    pub p_c_234: Option<f64>,
    pub p_c_opt: Option<f64>,
    pub gain_2: Option<f64>,
    pub gain_23: Option<f64>,
    pub gain_234: Option<f64>,
    pub gain_opt: Option<f64>,
    pub strategy_opt: String,
}

pub fn write_csv<R: Serialize>(dir: &Path, rows: &[R]) -> Result<PathBuf, CliError> {
    let path = dir.join(RESULTS);
    let csv_err = |source| CliError::Csv {
        path: path.clone(),
        source,
    };
    let mut writer = csv::Writer::from_path(&path).map_err(csv_err)?;
    for row in rows {
        writer.serialize(row).map_err(csv_err)?;
    }
    writer.flush().map_err(|source| CliError::Output {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}
