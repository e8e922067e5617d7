//! JSON output structures. Field order is fixed by the struct
//! declarations, vectors keep deterministic order, so identical runs
//! serialize to identical bytes.

use std::path::Path;

use serde::Serialize;
use survenet::select::{CcCandidate, CvPoint};
use survenet::{Error, Result};

#[derive(Serialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

#[derive(Serialize)]
pub struct ConfigEcho {
    pub lambda2_grid: Vec<f64>,
    pub lambda0_grid: Vec<f64>,
    pub t1_grid: Vec<f64>,
    pub folds: usize,
    pub gamma: f64,
    pub varsigma: f64,
    pub seed: u64,
    pub bootstrap_b: usize,
    pub cv_refit_weights: bool,
}

impl From<&survenet::Grid> for ConfigEcho {
    fn from(grid: &survenet::Grid) -> Self {
        Self {
            lambda2_grid: grid.lambda2_grid.clone(),
            lambda0_grid: grid.lambda0_grid.clone(),
            t1_grid: grid.t1_grid.clone(),
            folds: grid.folds,
            gamma: grid.gamma,
            varsigma: grid.varsigma,
            seed: grid.seed,
            bootstrap_b: grid.bootstrap_b,
            cv_refit_weights: grid.cv_refit_weights,
        }
    }
}

#[derive(Serialize)]
pub struct Tuning {
    pub t1: f64,
    pub lambda2: f64,
    pub lambda1: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda0: Option<f64>,
    pub cv_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aicc: Option<f64>,
}

#[derive(Serialize)]
pub struct ScreenEcho {
    pub dn: usize,
    pub kept: Vec<String>,
}

#[derive(Serialize)]
pub struct FitReport {
    pub command: String,
    pub method: String,
    pub input: String,
    pub config: ConfigEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub screen: Option<ScreenEcho>,
    pub tuning: Tuning,
    pub intercept: f64,
    pub coefficients: Vec<NamedValue>,
    pub selected: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda0_candidates: Option<Vec<CcCandidate<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cv_surface: Option<Vec<CvPoint<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u128>,
}

#[derive(Serialize)]
pub struct BootstrapReport {
    pub command: String,
    pub method: String,
    pub input: String,
    pub config: ConfigEcho,
    pub b: usize,
    pub retune_replicates: bool,
    pub tuning: Tuning,
    pub variance: Vec<NamedValue>,
    pub retries: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u128>,
}

#[derive(Serialize)]
pub struct ScreenReport {
    pub command: String,
    pub input: String,
    pub dn: usize,
    pub ranked: Vec<ScreenEntry>,
}

#[derive(Serialize)]
pub struct ScreenEntry {
    pub rank: usize,
    pub index: usize,
    pub name: String,
}

#[derive(Serialize)]
pub struct RiskReport {
    pub threshold: f64,
    pub n_high: usize,
    pub n_low: usize,
    pub degenerate: bool,
}

#[derive(Serialize)]
pub struct LogrankReport {
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Serialize)]
pub struct EvaluateReport {
    pub command: String,
    pub method: String,
    pub input: String,
    pub test: String,
    pub config: ConfigEcho,
    pub tuning: Tuning,
    pub intercept: f64,
    pub coefficients: Vec<NamedValue>,
    pub selected: Vec<String>,
    pub mse_train: f64,
    pub mse_test: f64,
    pub risk: RiskReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub logrank: Option<LogrankReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u128>,
}

#[derive(Serialize)]
pub struct SimulateReport {
    pub command: String,
    pub design: survenet::sim::SimDesign<f64>,
    pub c0: f64,
    pub raw_censored_fraction: f64,
    pub output: String,
}

/// Serialize to pretty JSON and write to the path, or stdout when absent.
pub fn emit<T: Serialize>(report: &T, path: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Config(format!("serializing output: {e}")))?;
    text.push('\n');
    match path {
        Some(p) => survenet::io::write_text(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
