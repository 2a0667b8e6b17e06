//! Fixed-point equations for the asymptotic order parameters of kernel and
//! random-feature estimators trained on rules-and-facts data.
//!
//! The estimator is summarised by three overlaps: `m` (alignment with the
//! rule), `q` (squared norm of the predictor) and `V` (its response to a
//! change of a single training target). The generalisation and memorisation
//! errors are explicit functions of these.

mod closed;
mod kernel;
mod moments;
mod rf;
mod search;
mod threshold;

pub use closed::{
    infinite_lambda_errors, krr_closed_solution, krr_lambda_opt, krr_large_alpha_coeff,
    ridgeless_perceptron_square,
};
pub use kernel::{KernelSolution, StateEqSolver};
pub use moments::{moments_by_quadrature, Moments};
pub use rf::{marchenko_pastur_stieltjes, RfConjugates, RfOverlaps, RfSolution};
pub use search::{AngleObjective, AngleSearch, LambdaOpt};
pub use threshold::{hinge_interp_threshold, hinge_threshold_asymptote};

use thiserror::Error;

use crate::channel::{prox, ChannelError, Label, Loss};
use crate::kernels::{KernelError, KernelGeometry};
use crate::numerics::{bisect_root, lit, normal_cdf, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateEqError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("singular point: {0}")]
    SingularPoint(String),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Overlaps `(m, q, V)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderParams<T> {
    pub m: T,
    pub q: T,
    pub v: T,
}

impl<T: Real> OrderParams<T> {
    pub fn gen_error(&self) -> T {
        gen_error_unchecked(self.m, self.q)
    }

    /// Memorisation error for either supported loss.
    pub fn mem_error(&self) -> T {
        mem_error_unchecked(self.q, self.v)
    }

    /// Squared cosine `m^2 / q` between predictor and rule.
    pub fn eta(&self) -> T {
        if self.q > T::zero() {
            (self.m * self.m / self.q).min(T::one())
        } else {
            T::zero()
        }
    }

    pub fn errors(&self) -> Errors<T> {
        Errors { gen: self.gen_error(), mem: self.mem_error() }
    }
}

/// Conjugate overlaps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conjugates<T> {
    pub m_hat: T,
    pub q_hat: T,
    pub v_hat: T,
}

/// Regularisation that is either a finite value or the limit `0+`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaChoice<T> {
    Finite(T),
    ZeroPlus,
}

impl<T: Real> LambdaChoice<T> {
    /// Numeric value, with `0+` reported as zero.
    pub fn value(&self) -> T {
        match *self {
            LambdaChoice::Finite(l) => l,
            LambdaChoice::ZeroPlus => T::zero(),
        }
    }

    pub fn is_zero_plus(&self) -> bool {
        matches!(self, LambdaChoice::ZeroPlus)
    }
}

/// Generalisation and memorisation errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Errors<T> {
    pub gen: T,
    pub mem: T,
}

/// Kernel estimator trained on `alpha d` samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErmSpec<T> {
    pub loss: Loss,
    pub geom: KernelGeometry<T>,
    pub lambda: T,
    pub alpha: T,
    pub eps: T,
}

impl<T: Real> ErmSpec<T> {
    pub fn new(
        loss: Loss,
        geom: KernelGeometry<T>,
        lambda: T,
        alpha: T,
        eps: T,
    ) -> Result<Self, StateEqError> {
        let spec = Self { loss, geom, lambda, alpha, eps };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), StateEqError> {
        let bad = |m: &str| Err(StateEqError::InvalidArgument(m.into()));
        if !(self.alpha > T::zero() && self.alpha.is_finite()) {
            return bad("sample ratio must be positive and finite");
        }
        if !(self.eps >= T::zero() && self.eps <= T::one()) {
            return bad("fact fraction must lie in [0, 1]");
        }
        if !(self.lambda >= T::zero() && self.lambda.is_finite()) {
            return bad("regularisation must be finite and >= 0");
        }
        let g = &self.geom;
        if !(g.mu1 >= T::zero() && g.mu_star >= T::zero() && g.mu1.is_finite() && g.mu_star.is_finite())
        {
            return bad("kernel coefficients must be finite and >= 0");
        }
        if g.mu1 == T::zero() && g.mu_star == T::zero() {
            return bad("kernel coefficients both vanish");
        }
        Ok(())
    }

    pub fn with_lambda(&self, lambda: T) -> Self {
        Self { lambda, ..*self }
    }

    pub fn with_geom(&self, geom: KernelGeometry<T>) -> Self {
        Self { geom, ..*self }
    }

    /// Same problem with coefficients scaled by `r` and regularisation by `r^2`.
    pub fn rescaled(&self, r: T) -> Self {
        Self { geom: self.geom.scaled(r), lambda: self.lambda * r * r, ..*self }
    }

    /// Initial overlaps used by every solver.
    pub fn initial_params(&self) -> OrderParams<T> {
        OrderParams { m: lit::<T>(0.1) * (T::one() - self.eps), q: lit(0.5), v: T::one() }
    }
}

/// Random-feature estimator with `kappa d` features.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfSpec<T> {
    pub erm: ErmSpec<T>,
    pub kappa: T,
}

impl<T: Real> RfSpec<T> {
    pub fn new(erm: ErmSpec<T>, kappa: T) -> Result<Self, StateEqError> {
        erm.validate()?;
        if !(kappa > T::zero() && kappa.is_finite()) {
            return Err(StateEqError::InvalidArgument("feature ratio must be positive".into()));
        }
        if !(erm.lambda > T::zero()) {
            return Err(StateEqError::InvalidArgument(
                "random features need a positive regularisation".into(),
            ));
        }
        if erm.geom.mu1 == T::zero() {
            return Err(StateEqError::InvalidArgument(
                "random features need a nonzero linear coefficient".into(),
            ));
        }
        Ok(Self { erm, kappa })
    }
}

/// `acos(m / sqrt(q)) / pi`.
pub fn gen_error<T: Real>(m: T, q: T) -> Result<T, StateEqError> {
    if !(q > T::zero()) {
        return Err(StateEqError::InvalidArgument("q must be positive".into()));
    }
    Ok(gen_error_unchecked(m, q))
}

/// `erfc(V / sqrt(2 q)) / 2`, the same for the square and hinge losses.
pub fn mem_error<T: Real>(_loss: Loss, q: T, v: T) -> Result<T, StateEqError> {
    if !(q > T::zero()) {
        return Err(StateEqError::InvalidArgument("q must be positive".into()));
    }
    if !(v >= T::zero()) {
        return Err(StateEqError::InvalidArgument("V must be >= 0".into()));
    }
    Ok(mem_error_unchecked(q, v))
}

// A vanishing predictor guesses on fresh inputs.
fn gen_error_unchecked<T: Real>(m: T, q: T) -> T {
    if !(q > T::zero()) {
        return lit(0.5);
    }
    (m / q.sqrt()).max(-T::one()).min(T::one()).acos() / T::PI()
}

// With q = 0 every training output sits on the side of its own label.
fn mem_error_unchecked<T: Real>(q: T, v: T) -> T {
    if v.is_infinite() || !(q > T::zero()) {
        return T::zero();
    }
    lit::<T>(0.5) * (v / (lit::<T>(2.0) * q).sqrt()).erfc()
}

/// Memorisation error from the proximal map of `loss` without using its
/// closed form: the fraction of Gaussian fields whose proximal point has
/// the wrong sign, averaged over the two labels.
pub fn mem_error_generic<T: Real>(loss: Loss, q: T, v: T) -> Result<T, StateEqError> {
    if !(q > T::zero() && v > T::zero()) {
        return Err(StateEqError::InvalidArgument("q and V must be positive".into()));
    }
    let root_q = q.sqrt();
    let edge: T = lit(60.0);
    let tol: T = lit(1e-14);
    let mut total = T::zero();
    for y in Label::BOTH {
        let sign: T = y.value();
        // Proximal points are nondecreasing in the field, so the wrong-sign
        // set is a half-line bounded by the root of the proximal map.
        let g = |xi: T| prox(loss, y, root_q * xi, v).unwrap_or(T::nan());
        let wrong = |p: T| if sign > T::zero() { p < T::zero() } else { p > T::zero() };
        let (lo_wrong, hi_wrong) = (wrong(g(-edge)), wrong(g(edge)));
        let mass = match (lo_wrong, hi_wrong) {
            (true, true) => T::one(),
            (false, false) => T::zero(),
            _ => {
                let root = bisect_root(&g, -edge, edge, tol)
                    .map_err(|e| StateEqError::InvalidArgument(e.to_string()))?;
                if hi_wrong {
                    normal_cdf(-root)
                } else {
                    normal_cdf(root)
                }
            }
        };
        total = total + mass;
    }
    Ok(lit::<T>(0.5) * total)
}

/// Solves the kernel equations with the default f64 solver.
pub fn solve_kernel_state_eqs(spec: &ErmSpec<f64>) -> Result<KernelSolution<f64>, StateEqError> {
    StateEqSolver::shared().solve_kernel(spec)
}

/// Solves the random-feature equations with the default f64 solver.
pub fn solve_rf_state_eqs(spec: &RfSpec<f64>) -> Result<RfSolution<f64>, StateEqError> {
    StateEqSolver::shared().solve_rf(spec)
}

/// Errors in the `lambda -> 0+` limit with the default f64 solver.
pub fn ridgeless_kernel(
    loss: Loss,
    geom: KernelGeometry<f64>,
    alpha: f64,
    eps: f64,
) -> Result<KernelSolution<f64>, StateEqError> {
    StateEqSolver::shared().solve_ridgeless(loss, geom, alpha, eps)
}
