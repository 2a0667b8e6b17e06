use crate::numerics::{bisect_root, lit, Real};

use super::StateEqError;

/// Largest sample ratio at which the ridgeless hinge perceptron still fits
/// every fact. Infinite at `eps = 0`, where the data stay separable.
pub fn hinge_interp_threshold<T: Real>(eps: T) -> Result<T, StateEqError> {
    if !(eps >= T::zero() && eps <= T::one()) {
        return Err(StateEqError::InvalidArgument("fact fraction must lie in [0, 1]".into()));
    }
    if eps == T::zero() {
        return Ok(T::infinity());
    }
    let rest = T::one() - eps;
    let gap = |alpha: T| {
        alpha * (lit::<T>(0.5) - rest / T::PI() * (alpha * rest / T::PI()).atan()) - T::one()
    };
    let mut hi: T = lit(2.0);
    while gap(hi) < T::zero() {
        hi = hi * lit(2.0);
        if !hi.is_finite() {
            return Err(StateEqError::InvalidArgument("threshold search overflowed".into()));
        }
    }
    let lo = hi * lit(0.5);
    if gap(hi) == T::zero() {
        return Ok(hi);
    }
    let tol = T::epsilon() * hi * lit(4.0);
    bisect_root(gap, lo, hi, tol).map_err(|e| StateEqError::InvalidArgument(e.to_string()))
}

/// Small-`eps` behaviour `(2 pi^2 / (3 eps))^(1/3)` of the threshold.
pub fn hinge_threshold_asymptote<T: Real>(eps: T) -> T {
    (lit::<T>(2.0) * T::PI() * T::PI() / (lit::<T>(3.0) * eps)).cbrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_facts_threshold_is_two() {
        assert_eq!(hinge_interp_threshold(1.0_f64).unwrap(), 2.0);
        assert!(hinge_interp_threshold(0.0_f64).unwrap().is_infinite());
    }

    #[test]
    fn small_eps_asymptote() {
        let eps = 1e-4_f64;
        let ratio = hinge_interp_threshold(eps).unwrap() / hinge_threshold_asymptote(eps);
        assert!((ratio - 1.0).abs() < 0.02, "{ratio}");
    }
}
