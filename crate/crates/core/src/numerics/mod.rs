//! Quadrature, special functions and scalar solvers shared by the other modules.

mod quadrature;
mod real;
mod solve;
mod special;

pub use quadrature::{GaussHermite, GaussLegendre, DEFAULT_HERMITE_ORDER};
pub use real::{from_usize, lit, Real};
pub use solve::{
    bisect_root, damped_fixed_point, golden_section_min, FixedPointConfig, FixedPointOutcome,
};
pub use special::{erf, erfc, erfcx, normal_cdf, normal_pdf};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no sign change on [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },
    #[error("eigenvalue iteration did not converge after {iterations} sweeps")]
    NoConvergence { iterations: usize },
}

/// Builds the default Gauss-Hermite rule.
pub fn gauss_hermite<T: Real>(order: usize) -> Result<GaussHermite<T>, NumericsError> {
    GaussHermite::new(order)
}
