//! Finite-size oracle: Gaussian rules-and-facts datasets, empirical kernel
//! and random-feature estimators, and averaging over seeds. Double precision only.

mod dataset;
mod estimators;
mod gram;
mod solvers;

pub use dataset::{generate_raf_dataset, RafDataset, TestSet};
pub use estimators::{
    empirical_krr, empirical_rf, empirical_rf_with, empirical_svm, Fit, KernelProblem, McConfig, McExperiment,
};
pub use gram::{cross_gram, gram, KernelMap, Normalization};

use thiserror::Error;

use crate::kernels::KernelError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum McError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("linear algebra failure: {0}")]
    Linalg(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Empirical errors, averaged over `n_repeats` draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalResult {
    pub e_gen_hat: f64,
    pub e_mem_hat: f64,
    /// Sample standard error; NaN for a single draw.
    pub stderr_gen: f64,
    pub stderr_mem: f64,
    pub n_repeats: usize,
    /// Every underlying fit met its stopping rule.
    pub converged: bool,
}

impl EmpiricalResult {
    pub(crate) fn single(e_gen_hat: f64, e_mem_hat: f64, converged: bool) -> Self {
        Self { e_gen_hat, e_mem_hat, stderr_gen: f64::NAN, stderr_mem: f64::NAN, n_repeats: 1, converged }
    }
}

/// Mean and standard error of each channel over independent draws.
pub fn aggregate(results: &[EmpiricalResult]) -> Result<EmpiricalResult, McError> {
    if results.is_empty() {
        return Err(McError::InvalidArgument("nothing to aggregate".into()));
    }
    let (gen, gen_se) = mean_stderr(results.iter().map(|r| r.e_gen_hat));
    let (mem, mem_se) = mean_stderr(results.iter().map(|r| r.e_mem_hat));
    Ok(EmpiricalResult {
        e_gen_hat: gen,
        e_mem_hat: mem,
        stderr_gen: gen_se,
        stderr_mem: mem_se,
        n_repeats: results.len(),
        converged: results.iter().all(|r| r.converged),
    })
}

/// Pointwise [`aggregate`] of equally long paths, one per draw.
pub fn aggregate_paths(paths: &[Vec<EmpiricalResult>]) -> Result<Vec<EmpiricalResult>, McError> {
    let len = paths.first().map(Vec::len).ok_or_else(|| McError::InvalidArgument("nothing to aggregate".into()))?;
    if paths.iter().any(|p| p.len() != len) {
        return Err(McError::InvalidArgument("paths differ in length".into()));
    }
    (0..len)
        .map(|k| aggregate(&paths.iter().map(|p| p[k]).collect::<Vec<_>>()))
        .collect()
}

fn mean_stderr(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, f64::NAN);
    }
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
