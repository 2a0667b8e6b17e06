//! Gaussian averages of the output channel that feed the conjugate overlaps.
//!
//! For overlaps `(m, q, V)` the three averages are
//!
//! ```text
//! M_m =  E_xi[ sum_y Z*(y) f*(y) f_out(y, sqrt(q) xi, V) ]
//! M_q =  E_xi[ sum_y Z*(y) f_out(y, sqrt(q) xi, V)^2 ]
//! M_v = -E_xi[ sum_y Z*(y) d_omega f_out(y, sqrt(q) xi, V) ]
//! ```
//!
//! with the teacher channel evaluated at mean `rho xi`, variance `1 - rho^2`
//! and `rho = m / sqrt(q)`. The conjugates are `m_hat = mu1 alpha M_m`,
//! `q_hat = mu1^2 alpha M_q` and `v_hat = mu1^2 alpha M_v`.

use crate::channel::{d_f_out_d_omega, f_out, f_out_star, z_out_star, Label, Loss};
use crate::numerics::{erfc, lit, normal_cdf, normal_pdf, GaussLegendre, Real};

use super::StateEqError;

/// Gaussian tails beyond this many standard deviations are dropped.
const TAIL: f64 = 20.0;

/// Largest `rho^2` used when forming the teacher channel.
pub(crate) const ALIGNMENT_CAP: f64 = 1.0 - 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments<T> {
    pub m: T,
    pub q: T,
    pub v: T,
}

/// Hinge averages multiplied by `V`, `V^2` and `V`; finite as `V -> infinity`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ScaledMoments<T> {
    pub m: T,
    pub q: T,
    pub v: T,
}

/// Signed cosine `m / sqrt(q)`, clipped away from +-1.
pub(crate) fn alignment<T: Real>(m: T, q: T) -> T {
    let cap = lit::<T>(ALIGNMENT_CAP).sqrt();
    if q <= T::zero() {
        return T::zero();
    }
    (m / q.sqrt()).max(-cap).min(cap)
}

/// Integration helper for the channel averages.
#[derive(Debug, Clone)]
pub(crate) struct Integrator<T> {
    rule: GaussLegendre<T>,
    tol: T,
}

impl<T: Real> Integrator<T> {
    pub fn new(tol: T) -> Self {
        Self { rule: GaussLegendre::new(15).expect("positive order"), tol }
    }

    /// Integral over `[lo, hi]` clipped to the Gaussian window, split at
    /// every point of `breaks` that falls inside.
    pub fn integrate<F: FnMut(T) -> T>(&self, lo: T, hi: T, breaks: &[T], mut f: F) -> T {
        let edge: T = lit(TAIL);
        let lo = lo.max(-edge);
        let hi = hi.min(edge);
        if !(lo < hi) {
            return T::zero();
        }
        let mut cuts: Vec<T> = breaks.iter().copied().filter(|&c| c > lo && c < hi).collect();
        cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite break points"));
        cuts.dedup();
        let mut total = T::zero();
        let mut left = lo;
        for c in cuts.into_iter().chain(std::iter::once(hi)) {
            total = total + self.rule.integrate_adaptive(left, c, self.tol, &mut f);
            left = c;
        }
        total
    }
}

/// Closed-form averages for the square loss.
pub(crate) fn square_moments<T: Real>(m: T, q: T, v: T, eps: T) -> Moments<T> {
    let slope = (T::one() - eps) * (lit::<T>(2.0) / T::PI()).sqrt();
    let w = T::one() + v;
    Moments { m: slope / w, q: (T::one() + q - lit::<T>(2.0) * slope * m) / (w * w), v: w.recip() }
}

/// Hinge averages scaled by powers of `V`. `v = None` is the `V -> infinity` limit.
pub(crate) fn hinge_scaled_moments<T: Real>(
    integ: &Integrator<T>,
    m: T,
    q: T,
    v: Option<T>,
    eps: T,
) -> ScaledMoments<T> {
    let rest = T::one() - eps;
    let rho = alignment(m, q);
    let root_q = q.sqrt();
    let spread = (T::one() - rho * rho).sqrt();
    let sigma = root_q * spread;
    let sharp = rho / (lit::<T>(2.0).sqrt() * spread);
    let zero = [T::zero()];
    let neg_inf = T::neg_infinity();

    // Weight of the label y = +1 in the xi-average: 2 Z*(+1, rho xi, 1 - rho^2) phi(xi).
    let weight = |xi: T| normal_pdf(xi) * (eps + rest * erfc(-sharp * xi));
    let upper = root_q.recip();
    let lower = match v {
        Some(v) => (T::one() - v) / root_q,
        None => neg_inf,
    };

    let p_v = integ.integrate(lower, upper, &zero, weight);
    let mut p_q = integ.integrate(lower, upper, &zero, |xi| {
        let gap = T::one() - root_q * xi;
        weight(xi) * gap * gap
    });
    if let Some(v) = v {
        p_q = p_q + v * v * integ.integrate(neg_inf, lower, &zero, weight);
    }

    // Linear term: average of f_out(+1, u) over u ~ N(0, sigma^2), times 2 (1 - eps) / sqrt(2 pi).
    let t_hi = sigma.recip();
    let t_lo = match v {
        Some(v) => (T::one() - v) / sigma,
        None => neg_inf,
    };
    let mut lin = integ.integrate(t_lo, t_hi, &[], |t| (T::one() - sigma * t) * normal_pdf(t));
    if let Some(v) = v {
        lin = lin + v * normal_cdf(t_lo);
    }
    let p_m = lit::<T>(2.0) * rest / T::TAU().sqrt() * lin;
    ScaledMoments { m: p_m, q: p_q, v: p_v }
}

/// Averages for `loss` at finite `V`.
pub(crate) fn moments<T: Real>(
    integ: &Integrator<T>,
    loss: Loss,
    m: T,
    q: T,
    v: T,
    eps: T,
) -> Moments<T> {
    match loss {
        Loss::Square => square_moments(m, q, v, eps),
        Loss::Hinge => {
            let s = hinge_scaled_moments(integ, m, q, Some(v), eps);
            Moments { m: s.m / v, q: s.q / (v * v), v: s.v / v }
        }
    }
}

/// Averages evaluated directly from the channel functions by quadrature.
///
/// Slow; kept as an independent check of the closed forms.
pub fn moments_by_quadrature<T: Real>(
    loss: Loss,
    m: T,
    q: T,
    v: T,
    eps: T,
    tol: T,
) -> Result<Moments<T>, StateEqError> {
    let integ = Integrator::new(tol);
    let rho = alignment(m, q);
    let tau = T::one() - rho * rho;
    let root_q = q.sqrt();
    let mut breaks = vec![T::zero()];
    if loss == Loss::Hinge {
        for w in [T::one(), T::one() - v] {
            breaks.push(w / root_q);
            breaks.push(-w / root_q);
        }
    }
    let mut err = None;
    let mut avg = |g: &dyn Fn(Label, T, T) -> Result<T, StateEqError>| {
        integ.integrate(-lit::<T>(TAIL), lit(TAIL), &breaks, |xi| {
            let mut acc = T::zero();
            for y in Label::BOTH {
                match g(y, rho * xi, root_q * xi) {
                    Ok(val) => acc = acc + val,
                    Err(e) => err = Some(e),
                }
            }
            normal_pdf(xi) * acc
        })
    };
    let mm = avg(&|y, star, omega| {
        let z = z_out_star(y, star, tau, eps)?;
        let fs = f_out_star(y, star, tau, eps)?;
        Ok(z * fs * f_out(loss, y, omega, v)?)
    });
    let mq = avg(&|y, star, omega| {
        let f = f_out(loss, y, omega, v)?;
        Ok(z_out_star(y, star, tau, eps)? * f * f)
    });
    let mv = avg(&|y, star, omega| {
        Ok(-z_out_star(y, star, tau, eps)? * d_f_out_d_omega(loss, y, omega, v)?)
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(Moments { m: mm, q: mq, v: mv })
}
