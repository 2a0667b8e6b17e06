use std::sync::OnceLock;

use crate::channel::Loss;
use crate::kernels::KernelGeometry;
use crate::numerics::{damped_fixed_point, lit, FixedPointConfig, Real};

use super::closed::{krr_ridgeless, ridgeless_perceptron_square};
use super::moments::{hinge_scaled_moments, moments, Integrator, Moments};
use super::threshold::hinge_interp_threshold;
use super::{Conjugates, ErmSpec, OrderParams, StateEqError};

/// Converged (or flagged) solution of the kernel equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSolution<T> {
    pub params: OrderParams<T>,
    /// For ridgeless solutions these are the limits of `m_hat / lambda`,
    /// `q_hat / lambda^2` and `v_hat / lambda`.
    pub conjugates: Conjugates<T>,
    pub iterations: usize,
    pub converged: bool,
    /// Largest relative change of an overlap under one more application of the map.
    pub residual: T,
}

impl<T: Real> KernelSolution<T> {
    pub(crate) fn exact(params: OrderParams<T>, conjugates: Conjugates<T>) -> Self {
        Self { params, conjugates, iterations: 0, converged: true, residual: T::zero() }
    }

    /// Turns a flagged solution into an error.
    pub fn require_converged(self) -> Result<Self, StateEqError> {
        if self.converged {
            Ok(self)
        } else {
            Err(StateEqError::NonConvergence {
                iterations: self.iterations,
                residual: self.residual.to_f64().unwrap_or(f64::NAN),
            })
        }
    }
}

/// Solver for the kernel and random-feature state equations.
#[derive(Debug, Clone)]
pub struct StateEqSolver<T> {
    pub(crate) integ: Integrator<T>,
    pub config: FixedPointConfig<T>,
}

impl<T: Real> Default for StateEqSolver<T> {
    fn default() -> Self {
        let tol = T::epsilon().sqrt() * lit(1e-5);
        Self { integ: Integrator::new(tol.max(lit(1e-13))), config: FixedPointConfig::default() }
    }
}

impl StateEqSolver<f64> {
    /// Process-wide default solver.
    pub fn shared() -> &'static Self {
        static SOLVER: OnceLock<StateEqSolver<f64>> = OnceLock::new();
        SOLVER.get_or_init(StateEqSolver::default)
    }
}

impl<T: Real> StateEqSolver<T> {
    /// Absolute tolerance of the channel integrals.
    pub fn with_integration_tol(mut self, tol: T) -> Self {
        self.integ = Integrator::new(tol);
        self
    }

    /// Channel averages at overlaps `(m, q, V)`, from the closed forms.
    pub fn channel_moments(&self, loss: Loss, m: T, q: T, v: T, eps: T) -> Result<Moments<T>, StateEqError> {
        if !(q > T::zero() && v > T::zero() && q.is_finite() && v.is_finite() && m.is_finite()) {
            return Err(StateEqError::InvalidArgument("needs finite m, q > 0 and V > 0".into()));
        }
        if !(eps >= T::zero() && eps <= T::one()) {
            return Err(StateEqError::InvalidArgument("fact fraction must lie in [0, 1]".into()));
        }
        Ok(moments(&self.integ, loss, m, q, v, eps))
    }

    /// One application of the kernel map at regularisation `lambda`, which
    /// may be zero only when `mu_star = 0`.
    pub(crate) fn kernel_step(
        &self,
        spec: &ErmSpec<T>,
        lambda: T,
        x: &OrderParams<T>,
    ) -> (OrderParams<T>, Conjugates<T>) {
        let ErmSpec { loss, geom, alpha, eps, .. } = *spec;
        let (mu1, mu_star) = (geom.mu1, geom.mu_star);
        let mom = moments(&self.integ, loss, x.m, x.q, x.v, eps);
        let hats = Conjugates {
            m_hat: mu1 * alpha * mom.m,
            q_hat: mu1 * mu1 * alpha * mom.q,
            v_hat: mu1 * mu1 * alpha * mom.v,
        };
        let den = lambda + hats.v_hat;
        let nonlinear = if mu_star > T::zero() { mu_star * mu_star / lambda } else { T::zero() };
        let next = OrderParams {
            m: mu1 * hats.m_hat / den,
            q: mu1 * mu1 * (hats.m_hat * hats.m_hat + hats.q_hat) / (den * den),
            v: mu1 * mu1 / den + nonlinear,
        };
        (next, hats)
    }

    /// Solution at `spec.lambda > 0`, started from the default point.
    pub fn solve_kernel(&self, spec: &ErmSpec<T>) -> Result<KernelSolution<T>, StateEqError> {
        self.solve_kernel_from(spec, spec.initial_params())
    }

    /// Solution at `spec.lambda > 0`, started from `init`.
    pub fn solve_kernel_from(
        &self,
        spec: &ErmSpec<T>,
        init: OrderParams<T>,
    ) -> Result<KernelSolution<T>, StateEqError> {
        spec.validate()?;
        if !(spec.lambda > T::zero()) {
            return Err(StateEqError::InvalidArgument(
                "the generic solver needs lambda > 0; use the ridgeless solver".into(),
            ));
        }
        if let Some(sol) = degenerate_rule(spec, spec.lambda) {
            return Ok(sol);
        }
        self.iterate_kernel(spec, spec.lambda, init)
    }

    fn iterate_kernel(
        &self,
        spec: &ErmSpec<T>,
        lambda: T,
        init: OrderParams<T>,
    ) -> Result<KernelSolution<T>, StateEqError> {
        let init = sanitize(init, spec);
        let out = damped_fixed_point(
            |x: &[T; 3]| {
                let (next, _) = self.kernel_step(spec, lambda, &from_array(x));
                Ok::<_, StateEqError>(to_array(&next))
            },
            to_array(&init),
            &self.config,
        )?;
        let params = from_array(&out.x);
        let (next, conjugates) = self.kernel_step(spec, lambda, &params);
        let residual = relative_residual(&params, &next);
        finite_or_error(&params)?;
        Ok(KernelSolution {
            params,
            conjugates,
            iterations: out.iterations,
            converged: out.converged,
            residual,
        })
    }

    /// Largest relative residual of `params` in the kernel equations.
    pub fn kernel_residual(&self, spec: &ErmSpec<T>, params: &OrderParams<T>) -> T {
        let (next, _) = self.kernel_step(spec, spec.lambda, params);
        relative_residual(params, &next)
    }

    /// Solution in the limit `lambda -> 0+`.
    pub fn solve_ridgeless(
        &self,
        loss: Loss,
        geom: KernelGeometry<T>,
        alpha: T,
        eps: T,
    ) -> Result<KernelSolution<T>, StateEqError> {
        let spec = ErmSpec::new(loss, geom, T::zero(), alpha, eps)?;
        if let Some(sol) = degenerate_rule(&spec, T::zero()) {
            return Ok(sol);
        }
        let zero = Conjugates { m_hat: T::zero(), q_hat: T::zero(), v_hat: T::zero() };
        match loss {
            Loss::Square => {
                let params = if geom.mu_star > T::zero() {
                    krr_ridgeless(geom, alpha, eps)?
                } else {
                    ridgeless_perceptron_square(alpha, eps)?
                };
                Ok(KernelSolution::exact(params, zero))
            }
            Loss::Hinge => {
                if geom.mu_star == T::zero() {
                    let threshold = hinge_interp_threshold(eps)?;
                    if alpha >= threshold {
                        // The perceptron stops interpolating: V stays finite at lambda = 0.
                        return self.iterate_kernel(&spec, T::zero(), spec.initial_params());
                    }
                }
                self.solve_hinge_rescaled(&spec)
            }
        }
    }

    /// Hinge equations rescaled by `lambda` in the interpolating regime,
    /// where `V` diverges as `v / lambda`.
    fn solve_hinge_rescaled(&self, spec: &ErmSpec<T>) -> Result<KernelSolution<T>, StateEqError> {
        let ErmSpec { geom, alpha, eps, .. } = *spec;
        let (mu1, mu_star) = (geom.mu1, geom.mu_star);
        let step = |x: &OrderParams<T>| {
            let p = hinge_scaled_moments(&self.integ, x.m, x.q, None, eps);
            let hats = Conjugates {
                m_hat: mu1 * alpha * p.m / x.v,
                q_hat: mu1 * mu1 * alpha * p.q / (x.v * x.v),
                v_hat: mu1 * mu1 * alpha * p.v / x.v,
            };
            let den = T::one() + hats.v_hat;
            let next = OrderParams {
                m: mu1 * hats.m_hat / den,
                q: mu1 * mu1 * (hats.m_hat * hats.m_hat + hats.q_hat) / (den * den),
                v: mu1 * mu1 / den + mu_star * mu_star,
            };
            (next, hats)
        };
        let init = sanitize(spec.initial_params(), spec);
        let out = damped_fixed_point(
            |x: &[T; 3]| Ok::<_, StateEqError>(to_array(&step(&from_array(x)).0)),
            to_array(&init),
            &self.config,
        )?;
        let scaled = from_array(&out.x);
        let (next, conjugates) = step(&scaled);
        let residual = relative_residual(&scaled, &next);
        finite_or_error(&scaled)?;
        Ok(KernelSolution {
            params: OrderParams { m: scaled.m, q: scaled.q, v: T::infinity() },
            conjugates,
            iterations: out.iterations,
            converged: out.converged,
            residual,
        })
    }
}

/// With `mu1 = 0` the rule is invisible: `m = q = 0` and only the nonlinear
/// part contributes to `V`.
fn degenerate_rule<T: Real>(spec: &ErmSpec<T>, lambda: T) -> Option<KernelSolution<T>> {
    if spec.geom.mu1 > T::zero() {
        return None;
    }
    let v = if lambda > T::zero() {
        spec.geom.mu_star * spec.geom.mu_star / lambda
    } else {
        T::infinity()
    };
    let zero = Conjugates { m_hat: T::zero(), q_hat: T::zero(), v_hat: T::zero() };
    Some(KernelSolution::exact(OrderParams { m: T::zero(), q: T::zero(), v }, zero))
}

fn sanitize<T: Real>(x: OrderParams<T>, spec: &ErmSpec<T>) -> OrderParams<T> {
    let ok = x.m.is_finite() && x.q > T::zero() && x.q.is_finite() && x.v > T::zero() && x.v.is_finite();
    if ok {
        x
    } else {
        spec.initial_params()
    }
}

fn finite_or_error<T: Real>(x: &OrderParams<T>) -> Result<(), StateEqError> {
    if x.m.is_finite() && x.q.is_finite() && x.v.is_finite() {
        Ok(())
    } else {
        Err(StateEqError::NonConvergence { iterations: 0, residual: f64::NAN })
    }
}

pub(crate) fn relative_residual<T: Real>(x: &OrderParams<T>, y: &OrderParams<T>) -> T {
    [(x.m, y.m), (x.q, y.q), (x.v, y.v)]
        .into_iter()
        .map(|(a, b)| relative_gap(a, b))
        .fold(T::zero(), T::max)
}

/// `|a - b|` relative to the larger magnitude; zero when both vanish.
pub(crate) fn relative_gap<T: Real>(a: T, b: T) -> T {
    let scale = a.abs().max(b.abs());
    if scale > T::zero() {
        (a - b).abs() / scale
    } else {
        T::zero()
    }
}

fn to_array<T: Copy>(x: &OrderParams<T>) -> [T; 3] {
    [x.m, x.q, x.v]
}

fn from_array<T: Copy>(x: &[T; 3]) -> OrderParams<T> {
    OrderParams { m: x[0], q: x[1], v: x[2] }
}
