use raf_core::bayes::solve_bo;
use raf_core::kernels::KernelGeometry;
use raf_core::state_eqs::{krr_closed_solution, ErmSpec, LambdaChoice, StateEqError, StateEqSolver};
use raf_core::Loss;

use crate::config::LambdaSetting;
use crate::CliError;

/// Cross-validated regularisation and the errors there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossValidation {
    pub lambda: LambdaChoice<f64>,
    pub e_gen: f64,
    pub e_mem: f64,
    /// The search stopped on an edge of its bracket.
    pub flagged: bool,
}

/// Regularisation minimising the generalisation error; `spec.lambda` is ignored.
pub fn cross_validate_lambda(spec: &ErmSpec<f64>) -> Result<CrossValidation, CliError> {
    if !(spec.eps < 1.0) {
        return Err(CliError::config("eps", "cross-validation needs eps < 1"));
    }
    let opt = StateEqSolver::shared().lambda_opt(spec)?;
    let errors = opt.solution.params.errors();
    Ok(CrossValidation { lambda: opt.lambda, e_gen: errors.gen, e_mem: errors.mem, flagged: opt.at_bracket_edge })
}

/// Power law `y = coefficient * x^exponent` fitted in log-log coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub exponent: f64,
    pub coefficient: f64,
    pub r2: f64,
}

pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit, CliError> {
    if points.len() < 5 {
        return Err(CliError::Invalid("a rate fit needs at least 5 points".into()));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(CliError::Invalid("rate fits need positive finite values".into()));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(CliError::Invalid("rate fits need distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let resid: f64 = logs.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - resid / syy } else { 1.0 };
    Ok(RateFit { exponent: slope, coefficient: intercept.exp(), r2 })
}

/// Coefficient of the power law `c x^exponent` with the exponent held fixed,
/// fitted in log space over the points with `x >= x_min`.
pub fn fit_coefficient(points: &[(f64, f64)], exponent: f64, x_min: f64) -> Result<f64, CliError> {
    let tail: Vec<f64> = points
        .iter()
        .filter(|p| p.0 >= x_min)
        .map(|&(x, y)| {
            if x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite() {
                Ok(y.ln() - exponent * x.ln())
            } else {
                Err(CliError::Invalid("rate fits need positive finite values".into()))
            }
        })
        .collect::<Result<_, _>>()?;
    if tail.is_empty() {
        return Err(CliError::Invalid(format!("no points at or above {x_min}")));
    }
    Ok((tail.iter().sum::<f64>() / tail.len() as f64).exp())
}

/// Estimator whose learning curve is traced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateModel {
    Bayes,
    Erm { loss: Loss, geom: KernelGeometry<f64>, lambda: LambdaSetting },
}

/// `(alpha, E_gen)` along `alphas`.
pub fn rate_curve(model: RateModel, eps: f64, alphas: &[f64]) -> Result<Vec<(f64, f64)>, CliError> {
    let solver = StateEqSolver::shared();
    let mut warm = None;
    alphas
        .iter()
        .map(|&alpha| {
            let gen = match model {
                RateModel::Bayes => solve_bo(alpha, eps)?.gen_error(),
                RateModel::Erm { loss, geom, lambda } => {
                    let spec = ErmSpec::new(loss, geom, 1.0, alpha, eps)?;
                    match lambda {
                        LambdaSetting::Value(l) if l > 0.0 => {
                            let spec = spec.with_lambda(l);
                            if loss == Loss::Square {
                                krr_closed_solution(&spec)?.gen_error()
                            } else {
                                let init = warm.unwrap_or_else(|| spec.initial_params());
                                let sol = solver.solve_kernel_from(&spec, init)?.require_converged()?;
                                warm = Some(sol.params);
                                sol.params.gen_error()
                            }
                        }
                        LambdaSetting::Value(_) | LambdaSetting::ZeroPlus => {
                            solver.solve_ridgeless(loss, geom, alpha, eps)?.require_converged()?.params.gen_error()
                        }
                        LambdaSetting::Opt => solver.lambda_opt(&spec)?.solution.params.gen_error(),
                    }
                }
            };
            Ok::<_, CliError>((alpha, gen))
        })
        .collect()
}

impl From<raf_core::kernels::KernelError> for CliError {
    fn from(e: raf_core::kernels::KernelError) -> Self {
        CliError::StateEq(StateEqError::from(e))
    }
}
