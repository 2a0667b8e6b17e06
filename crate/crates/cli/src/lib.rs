//! Drivers behind the `raf` binary: configuration, sweeps, cross-validation,
//! rate fits and CSV output.

pub mod analysis;
pub mod config;
pub mod output;
pub mod sweep;

pub use analysis::{cross_validate_lambda, fit_coefficient, fit_rate, rate_curve, CrossValidation, RateFit, RateModel};
pub use config::{parse_config, GeometrySpec, Grid, LambdaSetting, Quantity, Spacing, SweepConfig};
pub use output::{read_csv, write_csv, CsvRow, Source, CSV_HEADER};
pub use sweep::{default_lambda_grid, mc_rows, run_sweep, theory_row, write_gnuplot_stub, write_sweep, McRun};

use thiserror::Error;

use raf_core::bayes::BayesError;
use raf_core::montecarlo::McError;
use raf_core::state_eqs::StateEqError;

/// Environment variable holding the worker-pool size.
pub const THREADS_ENV: &str = "RAF_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error in `{key}`: {message}")]
    Config { key: String, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    StateEq(#[from] StateEqError),
    #[error(transparent)]
    Bayes(#[from] BayesError),
    #[error(transparent)]
    MonteCarlo(#[from] McError),
    #[error("{0}")]
    Invalid(String),
}

impl CliError {
    pub fn config(key: &str, message: impl Into<String>) -> Self {
        CliError::Config { key: key.into(), message: message.into() }
    }

    /// 2 for solver non-convergence, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::StateEq(StateEqError::NonConvergence { .. }) => 2,
            _ => 1,
        }
    }
}

/// Worker pool sized from [`THREADS_ENV`], or rayon's default when unset.
pub fn worker_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::config(THREADS_ENV, format!("expected a positive integer, got {raw:?}")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Invalid(e.to_string()))
}
