//! Random features of finite width `p = kappa d`.
//!
//! The second-layer weights split into a part along the linear features and
//! a part in the nonlinear remainder; each has its own overlaps
//! (`m_s, q_s, V_s`) and (`q_w, V_w`). The spectrum of the feature Gram
//! matrix enters through the Marchenko-Pastur law with ratio `gamma = 1 / kappa`.

use crate::numerics::{damped_fixed_point, lit, Real};

use super::kernel::{relative_gap, StateEqSolver};
use super::moments::moments;
use super::{OrderParams, RfSpec, StateEqError};

/// Overlaps of the two weight blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfOverlaps<T> {
    pub m_s: T,
    pub q_s: T,
    pub v_s: T,
    pub q_w: T,
    pub v_w: T,
}

/// Conjugates of [`RfOverlaps`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfConjugates<T> {
    pub m_hat_s: T,
    pub q_hat_s: T,
    pub v_hat_s: T,
    pub q_hat_w: T,
    pub v_hat_w: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfSolution<T> {
    /// Composite overlaps seen by the output channel.
    pub params: OrderParams<T>,
    pub blocks: RfOverlaps<T>,
    pub conjugates: RfConjugates<T>,
    pub iterations: usize,
    pub converged: bool,
    pub residual: T,
}

/// Stieltjes transform `g(z)` of the Marchenko-Pastur law with ratio `gamma`
/// at `z < 0`: the root of `gamma z g^2 + (z + gamma - 1) g + 1 = 0` that
/// vanishes as `z -> -infinity`.
pub fn marchenko_pastur_stieltjes<T: Real>(gamma: T, z: T) -> Result<T, StateEqError> {
    if !(gamma > T::zero() && z < T::zero()) {
        return Err(StateEqError::InvalidArgument("needs gamma > 0 and z < 0".into()));
    }
    let b = z + gamma - T::one();
    let disc = (b * b - lit::<T>(4.0) * gamma * z).sqrt();
    // The two roots multiply to 1 / (gamma z); take the small one without cancellation.
    let big = if b >= T::zero() { -(b + disc) } else { disc - b };
    let other = big / (lit::<T>(2.0) * gamma * z);
    Ok((gamma * z * other).recip())
}

impl<T: Real> RfOverlaps<T> {
    fn composite(&self, mu1: T, mu_star: T) -> OrderParams<T> {
        OrderParams {
            m: mu1 * self.m_s,
            q: mu1 * mu1 * self.q_s + mu_star * mu_star * self.q_w,
            v: mu1 * mu1 * self.v_s + mu_star * mu_star * self.v_w,
        }
    }

    fn to_array(self) -> [T; 5] {
        [self.m_s, self.q_s, self.v_s, self.q_w, self.v_w]
    }

    fn from_array(x: &[T; 5]) -> Self {
        Self { m_s: x[0], q_s: x[1], v_s: x[2], q_w: x[3], v_w: x[4] }
    }
}

impl<T: Real> StateEqSolver<T> {
    fn rf_step(&self, spec: &RfSpec<T>, x: &RfOverlaps<T>) -> (RfOverlaps<T>, RfConjugates<T>) {
        let erm = &spec.erm;
        let (mu1, mu_star) = (erm.geom.mu1, erm.geom.mu_star);
        let (alpha, lambda) = (erm.alpha, erm.lambda);
        let gamma = spec.kappa.recip();
        let two: T = lit(2.0);
        let one = T::one();

        let comp = x.composite(mu1, mu_star);
        let mom = moments(&self.integ, erm.loss, comp.m, comp.q, comp.v, erm.eps);
        let hats = RfConjugates {
            m_hat_s: mu1 * alpha * mom.m,
            q_hat_s: mu1 * mu1 * alpha * mom.q,
            v_hat_s: mu1 * mu1 * alpha * mom.v,
            q_hat_w: gamma * mu_star * mu_star * alpha * mom.q,
            v_hat_w: gamma * mu_star * mu_star * alpha * mom.v,
        };

        let reg = lambda + hats.v_hat_w;
        let z = reg / hats.v_hat_s;
        let sum = one + gamma + z;
        let delta = (sum * sum - lit::<T>(4.0) * gamma).sqrt();
        // (z + 1 + gamma - delta) / (2 gamma), written without cancellation.
        let resolvent = two / (sum + delta);
        let signal = hats.m_hat_s * hats.m_hat_s + hats.q_hat_s;
        let cross = (z * delta - z * z - (gamma + one) * z) / (two * delta);
        let q_s_shape = ((two * z + gamma + one) * delta
            - two * z * z
            - lit::<T>(3.0) * (gamma + one) * z
            - (gamma - one) * (gamma - one))
            / (two * gamma * delta);
        let q_w_shape = ((one - gamma) * delta + (gamma + one) * z + (gamma - one) * (gamma - one))
            / (two * delta);

        let next = RfOverlaps {
            m_s: hats.m_hat_s / hats.v_hat_s * resolvent,
            q_s: signal / (hats.v_hat_s * hats.v_hat_s) * q_s_shape
                - hats.q_hat_w / (reg * hats.v_hat_s) * cross / gamma,
            v_s: resolvent / hats.v_hat_s,
            q_w: hats.q_hat_w / (reg * reg) * q_w_shape - signal / (reg * hats.v_hat_s) * cross,
            v_w: (one - gamma - z + delta) / (two * reg),
        };
        (next, hats)
    }

    pub fn solve_rf(&self, spec: &RfSpec<T>) -> Result<RfSolution<T>, StateEqError> {
        let erm = &spec.erm;
        let norm = erm.geom.mu1 * erm.geom.mu1 + erm.geom.mu_star * erm.geom.mu_star;
        let init = RfOverlaps {
            m_s: lit::<T>(0.1) * (T::one() - erm.eps) / erm.geom.mu1,
            q_s: lit::<T>(0.5) / norm,
            v_s: norm.recip(),
            q_w: lit::<T>(0.5) / norm,
            v_w: norm.recip(),
        };
        self.solve_rf_from(spec, init)
    }

    pub fn solve_rf_from(
        &self,
        spec: &RfSpec<T>,
        init: RfOverlaps<T>,
    ) -> Result<RfSolution<T>, StateEqError> {
        let spec = RfSpec::new(spec.erm, spec.kappa)?;
        let out = damped_fixed_point(
            |x: &[T; 5]| Ok::<_, StateEqError>(self.rf_step(&spec, &RfOverlaps::from_array(x)).0.to_array()),
            init.to_array(),
            &self.config,
        )?;
        let blocks = RfOverlaps::from_array(&out.x);
        let (next, conjugates) = self.rf_step(&spec, &blocks);
        let residual = blocks
            .to_array()
            .iter()
            .zip(next.to_array())
            .map(|(&a, b)| relative_gap(a, b))
            .fold(T::zero(), T::max);
        let params = blocks.composite(spec.erm.geom.mu1, spec.erm.geom.mu_star);
        if !(params.m.is_finite() && params.q.is_finite() && params.v.is_finite()) {
            return Err(StateEqError::NonConvergence {
                iterations: out.iterations,
                residual: f64::NAN,
            });
        }
        Ok(RfSolution {
            params,
            blocks,
            conjugates,
            iterations: out.iterations,
            converged: out.converged,
            residual,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stieltjes_root_satisfies_quadratic() {
        for gamma in [0.1, 0.5, 1.0, 2.0, 7.0] {
            for z in [-1e-3, -0.1, -1.0, -10.0, -1e4] {
                let g: f64 = marchenko_pastur_stieltjes(gamma, z).unwrap();
                let res = gamma * z * g * g + (z + gamma - 1.0) * g + 1.0;
                assert!(res.abs() < 1e-10 * (1.0 + (gamma * z * g * g).abs()), "{gamma} {z} {res}");
            }
        }
        let g = marchenko_pastur_stieltjes(0.5_f64, -1e6).unwrap();
        assert!((g * 1e6 - 1.0).abs() < 1e-5, "{g}");
    }
}
