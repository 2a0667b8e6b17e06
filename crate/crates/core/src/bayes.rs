//! Bayes-optimal overlap for the rules-and-facts teacher.

use thiserror::Error;

use crate::numerics::{
    damped_fixed_point, erfcx, lit, FixedPointConfig, GaussHermite, Real, DEFAULT_HERMITE_ORDER,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BayesError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Converged Bayes-optimal overlap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoSolution<T> {
    pub q_b: T,
    pub q_hat_b: T,
    pub iterations: usize,
    pub converged: bool,
}

impl<T: Real> BoSolution<T> {
    pub fn gen_error(&self) -> T {
        bo_gen_error(self.q_b).expect("solver keeps the overlap in [0, 1]")
    }
}

/// Largest overlap the solver will report.
const OVERLAP_CAP: f64 = 1.0 - 1e-12;

/// Solver for the scalar Bayes-optimal fixed point.
#[derive(Debug, Clone)]
pub struct BayesSolver<T> {
    rule: GaussHermite<T>,
    pub config: FixedPointConfig<T>,
}

impl<T: Real> Default for BayesSolver<T> {
    fn default() -> Self {
        Self::new(DEFAULT_HERMITE_ORDER).expect("default order is positive")
    }
}

impl<T: Real> BayesSolver<T> {
    pub fn new(order: usize) -> Result<Self, BayesError> {
        let rule =
            GaussHermite::new(order).map_err(|e| BayesError::InvalidArgument(e.to_string()))?;
        Ok(Self { rule, config: FixedPointConfig::default() })
    }

    /// Conjugate overlap produced by overlap `q`.
    pub fn q_hat(&self, q: T, alpha: T, eps: T) -> T {
        let q = q.max(T::zero()).min(lit(OVERLAP_CAP));
        let rest = T::one() - eps;
        let root_q = q.sqrt();
        let inner = self.rule.expect(|t| {
            // exp(-q t^2 / 2) / (1 + rest * erf(sqrt(q) t / sqrt 2)), written so
            // that neither factor under- or overflows on its own.
            let x = root_q * t / T::SQRT_2();
            if x < T::zero() {
                let s = -x;
                let floor = if eps > T::zero() { eps * (s * s).exp() } else { T::zero() };
                (floor + rest * erfcx(s)).recip()
            } else {
                (-(x * x)).exp() / (T::one() + rest * x.erf())
            }
        });
        lit::<T>(2.0) * alpha * rest * rest / (T::PI() * (T::one() - q).sqrt()) * inner
    }

    /// Fixed point of `q = q_hat(q) / (1 + q_hat(q))`, started at `init`.
    pub fn solve_from(&self, alpha: T, eps: T, init: T) -> Result<BoSolution<T>, BayesError> {
        check_inputs(alpha, eps)?;
        if eps == T::one() {
            return Ok(BoSolution { q_b: T::zero(), q_hat_b: T::zero(), iterations: 0, converged: true });
        }
        if !(init >= T::zero() && init < T::one()) {
            return Err(BayesError::InvalidArgument("initial overlap must lie in [0, 1)".into()));
        }
        // Iterate on u = -ln(1 - q) = ln(1 + q_hat), which stays well scaled as q -> 1.
        let u_cap = -(T::one() - lit::<T>(OVERLAP_CAP)).ln();
        let map = |u: &[T; 1]| {
            let q = -(-u[0]).exp_m1();
            Ok::<_, BayesError>([self.q_hat(q, alpha, eps).ln_1p().min(u_cap)])
        };
        let init_u = -(-init).ln_1p();
        let out = damped_fixed_point(map, [init_u], &self.config)?;
        let u = out.x[0];
        let q_b = (-(-u).exp_m1()).max(T::zero()).min(lit(OVERLAP_CAP));
        Ok(BoSolution {
            q_b,
            q_hat_b: self.q_hat(q_b, alpha, eps),
            iterations: out.iterations,
            converged: out.converged,
        })
    }

    pub fn solve(&self, alpha: T, eps: T) -> Result<BoSolution<T>, BayesError> {
        self.solve_from(alpha, eps, lit(0.5))
    }

    /// Coefficient of the `1 / alpha` decay of the Bayes-optimal error.
    pub fn rate_constant(&self, eps: T) -> Result<T, BayesError> {
        if !(eps >= T::zero() && eps < T::one()) {
            return Err(BayesError::InvalidArgument("fact fraction must lie in [0, 1)".into()));
        }
        let rest = T::one() - eps;
        let half: T = lit(0.5);
        // Integral of exp(-t^2) / (1 + rest erf(t / sqrt 2)) against the unit Gaussian weight.
        let mean = self.rule.expect(|t| {
            let x = t / T::SQRT_2();
            if x < T::zero() {
                let s = -x;
                let floor = if eps > T::zero() { eps * (half * t * t).exp() } else { T::zero() };
                (floor + rest * erfcx(s)).recip()
            } else {
                (-(half * t * t)).exp() / (T::one() + rest * x.erf())
            }
        });
        let integral = T::TAU().sqrt() * mean;
        Ok(T::TAU().sqrt() / (lit::<T>(2.0) * rest * rest * integral))
    }
}

fn check_inputs<T: Real>(alpha: T, eps: T) -> Result<(), BayesError> {
    if !(alpha > T::zero() && alpha.is_finite()) {
        return Err(BayesError::InvalidArgument("sample ratio must be positive".into()));
    }
    if !(eps >= T::zero() && eps <= T::one()) {
        return Err(BayesError::InvalidArgument("fact fraction must lie in [0, 1]".into()));
    }
    Ok(())
}

/// Generalisation error at overlap `q_b`.
pub fn bo_gen_error<T: Real>(q_b: T) -> Result<T, BayesError> {
    if !(q_b >= T::zero() && q_b <= T::one()) {
        return Err(BayesError::InvalidArgument("overlap must lie in [0, 1]".into()));
    }
    Ok(q_b.sqrt().acos() / T::PI())
}

/// Solves with the default f64 solver.
pub fn solve_bo(alpha: f64, eps: f64) -> Result<BoSolution<f64>, BayesError> {
    default_solver().solve(alpha, eps)
}

/// Rate constant with the default f64 solver.
pub fn bo_rate_constant(eps: f64) -> Result<f64, BayesError> {
    default_solver().rate_constant(eps)
}

fn default_solver() -> &'static BayesSolver<f64> {
    static SOLVER: std::sync::OnceLock<BayesSolver<f64>> = std::sync::OnceLock::new();
    SOLVER.get_or_init(BayesSolver::default)
}
