//! Searches over the regularisation and the kernel angle.

use crate::channel::Loss;
use crate::kernels::KernelGeometry;
use crate::numerics::{golden_section_min, lit, Real};

use super::closed::{krr_closed_solution, krr_lambda_opt};
use super::kernel::{KernelSolution, StateEqSolver};
use super::{ErmSpec, LambdaChoice, StateEqError};

/// Bracket of the hinge regularisation search.
pub const HINGE_LAMBDA_RANGE: (f64, f64) = (1e-8, 1e3);

/// Tolerance of the hinge search, in units of `ln lambda`.
pub const HINGE_LAMBDA_TOL: f64 = 1e-4;

/// Regularisation minimising the generalisation error, with the solution there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaOpt<T> {
    pub lambda: LambdaChoice<T>,
    pub solution: KernelSolution<T>,
    /// The hinge search ended on an edge of its bracket.
    pub at_bracket_edge: bool,
}

/// Quantity minimised over the kernel angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleObjective {
    /// Generalisation error at the optimal regularisation.
    GenAtLambdaOpt,
    /// Generalisation error as `lambda -> 0+`.
    GenRidgeless,
}

/// Best kernel angle for an objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleSearch<T> {
    pub gamma: T,
    pub value: T,
    /// Regularisation at the best angle; `ZeroPlus` for the ridgeless objective.
    pub lambda: LambdaChoice<T>,
}

impl<T: Real> StateEqSolver<T> {
    /// Optimal regularisation for `spec`; `spec.lambda` is ignored.
    pub fn lambda_opt(&self, spec: &ErmSpec<T>) -> Result<LambdaOpt<T>, StateEqError> {
        let spec = spec.with_lambda(T::one());
        spec.validate()?;
        match spec.loss {
            Loss::Square => {
                let lambda = krr_lambda_opt(spec.eps, spec.geom)?;
                let solution = match lambda {
                    LambdaChoice::Finite(l) => {
                        let s = spec.with_lambda(l);
                        let params = krr_closed_solution(&s)?;
                        let (_, hats) = self.kernel_step(&s, l, &params);
                        KernelSolution::exact(params, hats)
                    }
                    LambdaChoice::ZeroPlus => {
                        self.solve_ridgeless(spec.loss, spec.geom, spec.alpha, spec.eps)?
                    }
                };
                Ok(LambdaOpt { lambda, solution, at_bracket_edge: false })
            }
            Loss::Hinge => self.hinge_lambda_opt(&spec),
        }
    }

    fn hinge_lambda_opt(&self, spec: &ErmSpec<T>) -> Result<LambdaOpt<T>, StateEqError> {
        let lo = lit::<T>(HINGE_LAMBDA_RANGE.0).ln();
        let hi = lit::<T>(HINGE_LAMBDA_RANGE.1).ln();
        let tol: T = lit(HINGE_LAMBDA_TOL);
        let mut warm: Option<KernelSolution<T>> = None;
        let mut eval = |u: T| -> Result<KernelSolution<T>, StateEqError> {
            let s = spec.with_lambda(u.exp());
            let init = warm.map(|w| w.params).unwrap_or_else(|| s.initial_params());
            let sol = self.solve_kernel_from(&s, init)?.require_converged()?;
            warm = Some(sol);
            Ok(sol)
        };
        let (u_best, _) = golden_section_min(|u| eval(u).map(|s| s.params.gen_error()), lo, hi, tol)?;
        let solution = eval(u_best)?;
        let at_bracket_edge = (u_best - lo) <= lit::<T>(2.0) * tol || (hi - u_best) <= lit::<T>(2.0) * tol;
        if (u_best - lo) <= lit::<T>(2.0) * tol {
            let ridgeless = self.solve_ridgeless(spec.loss, spec.geom, spec.alpha, spec.eps)?;
            if ridgeless.params.gen_error() <= solution.params.gen_error() {
                return Ok(LambdaOpt { lambda: LambdaChoice::ZeroPlus, solution: ridgeless, at_bracket_edge });
            }
        }
        Ok(LambdaOpt { lambda: LambdaChoice::Finite(u_best.exp()), solution, at_bracket_edge })
    }

    fn angle_value(
        &self,
        spec: &ErmSpec<T>,
        gamma: T,
        objective: AngleObjective,
    ) -> Result<(T, LambdaChoice<T>), StateEqError> {
        let geom = KernelGeometry::from_angle(gamma)?;
        let spec = spec.with_geom(geom);
        match objective {
            AngleObjective::GenAtLambdaOpt => {
                let opt = self.lambda_opt(&spec)?;
                Ok((opt.solution.params.gen_error(), opt.lambda))
            }
            AngleObjective::GenRidgeless => {
                let sol = self.solve_ridgeless(spec.loss, geom, spec.alpha, spec.eps)?;
                Ok((sol.params.gen_error(), LambdaChoice::ZeroPlus))
            }
        }
    }

    /// Kernel angle in `[0, pi/2]` minimising `objective`: a coarse scan
    /// followed by golden-section refinement around the best grid point.
    pub fn best_angle(
        &self,
        spec: &ErmSpec<T>,
        objective: AngleObjective,
        grid: usize,
        tol: T,
    ) -> Result<AngleSearch<T>, StateEqError> {
        if grid < 3 {
            return Err(StateEqError::InvalidArgument("angle grid needs at least 3 points".into()));
        }
        let top = T::FRAC_PI_2();
        let step = top / lit((grid - 1) as f64);
        let mut best: Option<(usize, T, LambdaChoice<T>)> = None;
        for k in 0..grid {
            let gamma = if k + 1 == grid { top } else { step * lit(k as f64) };
            let (value, lambda) = self.angle_value(spec, gamma, objective)?;
            if best.is_none_or(|(_, v, _)| value < v) {
                best = Some((k, value, lambda));
            }
        }
        let (k, coarse_value, coarse_lambda) = best.expect("grid is not empty");
        let lo = step * lit(k.saturating_sub(1) as f64);
        let hi = (step * lit((k + 1) as f64)).min(top);
        let (gamma, value) =
            golden_section_min(|g| self.angle_value(spec, g, objective).map(|v| v.0), lo, hi, tol)?;
        if coarse_value < value {
            let gamma = if k + 1 == grid { top } else { step * lit(k as f64) };
            return Ok(AngleSearch { gamma, value: coarse_value, lambda: coarse_lambda });
        }
        let (_, lambda) = self.angle_value(spec, gamma, objective)?;
        Ok(AngleSearch { gamma, value, lambda })
    }
}
