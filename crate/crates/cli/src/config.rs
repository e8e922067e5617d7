//! Tuning-grid construction from a JSON file plus flag overrides.

use std::path::PathBuf;

use clap::Args;
use survenet::{Error, Grid, Result};

#[derive(Args, Clone, Debug)]
pub struct GridArgs {
    /// JSON tuning configuration (keys: lambda2_grid, lambda0_grid,
    /// t1_grid, folds, gamma, varsigma, seed, bootstrap_b,
    /// cv_refit_weights). Flags override file values.
    #[arg(long)]
    pub grid: Option<PathBuf>,

    /// Cross-validation folds.
    #[arg(long)]
    pub folds: Option<usize>,

    /// Adaptive-weight exponent.
    #[arg(long)]
    pub gamma: Option<f64>,

    /// Selection threshold |beta| > varsigma for constrained fits.
    #[arg(long)]
    pub varsigma: Option<f64>,

    /// Comma-separated ridge levels.
    #[arg(long, value_delimiter = ',')]
    pub lambda2_grid: Option<Vec<f64>>,

    /// Comma-separated constraint-violation penalties.
    #[arg(long, value_delimiter = ',')]
    pub lambda0_grid: Option<Vec<f64>>,

    /// Comma-separated l1-fraction grid in [0, 1].
    #[arg(long, value_delimiter = ',')]
    pub t1_grid: Option<Vec<f64>>,

    /// Bootstrap replicate count for SE-based weights.
    #[arg(long = "bootstrap-B")]
    pub bootstrap_b: Option<usize>,

    /// Re-estimate penalty weights inside each cross-validation fold.
    #[arg(long)]
    pub cv_refit_weights: bool,

    /// RNG seed for fold splits, bootstraps and simulation.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl GridArgs {
    pub fn build(&self) -> Result<Grid> {
        let mut grid = match &self.grid {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                Grid::from_json_str(&text)?
            }
            None => Grid::default(),
        };
        if let Some(folds) = self.folds {
            grid.folds = folds;
        }
        if let Some(gamma) = self.gamma {
            grid.gamma = gamma;
        }
        if let Some(varsigma) = self.varsigma {
            grid.varsigma = varsigma;
        }
        if let Some(l2) = &self.lambda2_grid {
            grid.lambda2_grid = l2.clone();
        }
        if let Some(l0) = &self.lambda0_grid {
            grid.lambda0_grid = l0.clone();
        }
        if let Some(t1) = &self.t1_grid {
            grid.t1_grid = t1.clone();
        }
        if let Some(b) = self.bootstrap_b {
            grid.bootstrap_b = b;
        }
        if self.cv_refit_weights {
            grid.cv_refit_weights = true;
        }
        grid.seed = self.seed;
        Ok(grid)
    }
}
