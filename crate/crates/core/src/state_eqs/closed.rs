//! Closed forms for ridge regression and the limits of the regularisation path.

use crate::channel::Loss;
use crate::kernels::KernelGeometry;
use crate::numerics::{lit, Real};

use super::{gen_error, mem_error, ErmSpec, Errors, LambdaChoice, OrderParams, StateEqError};

/// `(1 - eps) sqrt(2 / pi)`: correlation between the label and the rule field.
pub(crate) fn label_slope<T: Real>(eps: T) -> T {
    (T::one() - eps) * (lit::<T>(2.0) / T::PI()).sqrt()
}

fn check_alpha_eps<T: Real>(alpha: T, eps: T) -> Result<(), StateEqError> {
    if !(alpha > T::zero() && alpha.is_finite()) {
        return Err(StateEqError::InvalidArgument("sample ratio must be positive and finite".into()));
    }
    if !(eps >= T::zero() && eps <= T::one()) {
        return Err(StateEqError::InvalidArgument("fact fraction must lie in [0, 1]".into()));
    }
    Ok(())
}

/// Positive root of `x^2 + (alpha - 1 - r) x - alpha r = 0`.
fn effective_root<T: Real>(alpha: T, r: T) -> T {
    let b = alpha - T::one() - r;
    let disc = (b * b + lit::<T>(4.0) * alpha * r).sqrt();
    if b >= T::zero() {
        lit::<T>(2.0) * alpha * r / (b + disc)
    } else {
        lit::<T>(0.5) * (disc - b)
    }
}

/// `(m, q)` as functions of `D = alpha + x`.
fn overlaps_from_root<T: Real>(alpha: T, eps: T, x: T) -> (T, T) {
    let c = label_slope(eps);
    let d = alpha + x;
    let m = alpha * c / d;
    let q = alpha * (T::one() + alpha * c * c * (d - lit(2.0)) / d) / (d * d - alpha);
    (m, q)
}

/// Ridge regression overlaps at `lambda > 0` in closed form.
pub fn krr_closed_solution<T: Real>(spec: &ErmSpec<T>) -> Result<OrderParams<T>, StateEqError> {
    spec.validate()?;
    if spec.loss != Loss::Square {
        return Err(StateEqError::InvalidArgument("closed form exists for the square loss only".into()));
    }
    if !(spec.lambda > T::zero()) {
        return Err(StateEqError::InvalidArgument("closed form needs lambda > 0".into()));
    }
    let KernelGeometry { mu1, mu_star, .. } = spec.geom;
    if mu1 == T::zero() {
        return Ok(OrderParams { m: T::zero(), q: T::zero(), v: mu_star * mu_star / spec.lambda });
    }
    let ell = spec.lambda / (mu1 * mu1);
    let s = (mu_star / mu1).powi(2);
    let x = effective_root(spec.alpha, ell + s);
    let (m, q) = overlaps_from_root(spec.alpha, spec.eps, x);
    Ok(OrderParams { m, q, v: x / ell - T::one() })
}

/// Ridge regression with a nonlinear kernel part as `lambda -> 0+`; `V` diverges.
pub(crate) fn krr_ridgeless<T: Real>(
    geom: KernelGeometry<T>,
    alpha: T,
    eps: T,
) -> Result<OrderParams<T>, StateEqError> {
    check_alpha_eps(alpha, eps)?;
    if !(geom.mu_star > T::zero() && geom.mu1 > T::zero()) {
        return Err(StateEqError::InvalidArgument("needs mu1 > 0 and mu_star > 0".into()));
    }
    let s = (geom.mu_star / geom.mu1).powi(2);
    let x = effective_root(alpha, s);
    let (m, q) = overlaps_from_root(alpha, eps, x);
    Ok(OrderParams { m, q, v: T::infinity() })
}

/// Minimum-norm least squares on the raw inputs.
pub fn ridgeless_perceptron_square<T: Real>(alpha: T, eps: T) -> Result<OrderParams<T>, StateEqError> {
    check_alpha_eps(alpha, eps)?;
    if alpha == T::one() {
        return Err(StateEqError::SingularPoint(
            "ridgeless least squares is singular at alpha = 1".into(),
        ));
    }
    let c = label_slope(eps);
    if alpha < T::one() {
        let q = alpha * (T::one() - alpha * c * c) / (T::one() - alpha);
        Ok(OrderParams { m: alpha * c, q, v: T::infinity() })
    } else {
        let excess = alpha - T::one();
        let q = (T::one() + c * c * (alpha - lit(2.0))) / excess;
        Ok(OrderParams { m: c, q, v: excess.recip() })
    }
}

/// Regularisation minimising the ridge generalisation error.
pub fn krr_lambda_opt<T: Real>(eps: T, geom: KernelGeometry<T>) -> Result<LambdaChoice<T>, StateEqError> {
    if !(eps >= T::zero() && eps < T::one()) {
        return Err(StateEqError::InvalidArgument("fact fraction must lie in [0, 1)".into()));
    }
    let rest = T::one() - eps;
    let ratio = T::FRAC_PI_2() / (rest * rest) - T::one();
    let (lin, nonlin) = (geom.mu1 * geom.mu1 * ratio, geom.mu_star * geom.mu_star);
    let lambda = lin - nonlin;
    // Differences at rounding level count as an exact tie.
    let noise = lit::<T>(64.0) * T::epsilon() * (lin + nonlin);
    Ok(if lambda > noise { LambdaChoice::Finite(lambda) } else { LambdaChoice::ZeroPlus })
}

/// Errors as `lambda -> infinity`, where only the label-input correlation survives.
pub fn infinite_lambda_errors<T: Real>(
    alpha: T,
    eps: T,
    geom: KernelGeometry<T>,
) -> Result<Errors<T>, StateEqError> {
    check_alpha_eps(alpha, eps)?;
    let KernelGeometry { mu1, mu_star, .. } = geom;
    if mu1 == T::zero() {
        return Ok(Errors { gen: lit(0.5), mem: T::zero() });
    }
    let c = label_slope(eps);
    // Overlaps up to the common factor mu1^2 / lambda.
    let m = alpha * c;
    let q = alpha * alpha * c * c + alpha;
    let v = T::one() + (mu_star / mu1).powi(2);
    Ok(Errors { gen: gen_error(m, q)?, mem: mem_error(Loss::Square, q, v)? })
}

/// Coefficient of the `alpha^(-1/2)` decay of the ridge generalisation error.
pub fn krr_large_alpha_coeff<T: Real>(eps: T) -> Result<T, StateEqError> {
    if !(eps >= T::zero() && eps < T::one()) {
        return Err(StateEqError::InvalidArgument("fact fraction must lie in [0, 1)".into()));
    }
    let a = label_slope(eps);
    Ok((T::one() - a * a).sqrt() / (T::PI() * a))
}
