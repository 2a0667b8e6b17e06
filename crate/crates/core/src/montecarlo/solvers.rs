//! Iterative solvers for the regularised Gram systems and the hinge dual.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ShiftedSolve {
    /// One solution per shift, in the order given.
    pub solutions: Vec<DVector<f64>>,
    pub iterations: usize,
    pub converged: bool,
}

/// Conjugate gradients for `(g + shift) x = b` at every positive shift at
/// once, driven by the smallest shift.
pub(crate) fn multi_shift_cg(
    g: &DMatrix<f64>,
    b: &DVector<f64>,
    shifts: &[f64],
    tol: f64,
    max_iter: usize,
) -> ShiftedSolve {
    let n = b.len();
    let k = shifts.len();
    let base = (0..k).min_by(|&i, &j| shifts[i].total_cmp(&shifts[j])).unwrap_or(0);
    let s0 = shifts.get(base).copied().unwrap_or(0.0);
    let mut x = vec![DVector::zeros(n); k];
    let mut p = vec![b.clone(); k];
    let mut zeta = vec![1.0; k];
    let mut zeta_prev = vec![1.0; k];
    let mut done = vec![false; k];
    let mut r = b.clone();
    let mut rr = r.norm_squared();
    let target = tol * b.norm();
    let (mut alpha_prev, mut beta_prev) = (1.0, 0.0);
    let mut q = DVector::zeros(n);
    if rr.sqrt() <= target || k == 0 {
        return ShiftedSolve { solutions: x, iterations: 0, converged: true };
    }
    for it in 1..=max_iter {
        q.gemv(1.0, g, &p[base], 0.0);
        q.axpy(s0, &p[base], 1.0);
        let alpha = rr / p[base].dot(&q);
        let mut zeta_next = vec![0.0; k];
        for s in 0..k {
            if done[s] {
                continue;
            }
            if s == base {
                zeta_next[s] = 1.0;
                x[s].axpy(alpha, &p[s], 1.0);
                continue;
            }
            let delta = shifts[s] - s0;
            let den = alpha * beta_prev * (zeta_prev[s] - zeta[s])
                + zeta_prev[s] * alpha_prev * (1.0 + delta * alpha);
            zeta_next[s] = zeta[s] * zeta_prev[s] * alpha_prev / den;
            let alpha_s = alpha * zeta_next[s] / zeta[s];
            x[s].axpy(alpha_s, &p[s], 1.0);
        }
        r.axpy(-alpha, &q, 1.0);
        let rr_next = r.norm_squared();
        let beta = rr_next / rr;
        let rnorm = rr_next.sqrt();
        for s in 0..k {
            if done[s] {
                continue;
            }
            if s == base {
                p[s].axpy(1.0, &r, beta);
            } else {
                let ratio = zeta_next[s] / zeta[s];
                p[s].axpy(zeta_next[s], &r, beta * ratio * ratio);
            }
            zeta_prev[s] = zeta[s];
            zeta[s] = zeta_next[s];
            if zeta[s].abs() * rnorm <= target {
                done[s] = true;
            }
        }
        rr = rr_next;
        alpha_prev = alpha;
        beta_prev = beta;
        if done.iter().all(|&d| d) {
            return ShiftedSolve { solutions: x, iterations: it, converged: true };
        }
        if !rnorm.is_finite() {
            break;
        }
    }
    ShiftedSolve { solutions: x, iterations: max_iter, converged: false }
}

/// Minimum-norm least-squares solution of `g x = b` for symmetric `g`,
/// by conjugate gradients on the normal equations.
pub(crate) fn min_norm_least_squares(
    g: &DMatrix<f64>,
    b: &DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> (DVector<f64>, usize, bool) {
    let n = b.len();
    let mut x = DVector::zeros(n);
    let mut r = b.clone();
    let mut s = DVector::zeros(n);
    s.gemv(1.0, g, &r, 0.0);
    let target = tol * s.norm();
    let mut p = s.clone();
    let mut gamma = s.norm_squared();
    let mut q = DVector::zeros(n);
    if gamma.sqrt() <= target || gamma == 0.0 {
        return (x, 0, true);
    }
    for it in 1..=max_iter {
        q.gemv(1.0, g, &p, 0.0);
        let alpha = gamma / q.norm_squared();
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &q, 1.0);
        s.gemv(1.0, g, &r, 0.0);
        let gamma_next = s.norm_squared();
        if gamma_next.sqrt() <= target || r.norm() <= tol * b.norm() {
            return (x, it, true);
        }
        if !gamma_next.is_finite() {
            break;
        }
        p.axpy(1.0, &s, gamma_next / gamma);
        gamma = gamma_next;
    }
    (x, max_iter, false)
}

/// Access to `u = G (a * y)` for the hinge dual, where `G` is a Gram matrix.
pub(crate) trait DualKernel {
    fn diag(&self, i: usize) -> f64;
    fn field(&self, i: usize) -> f64;
    /// `u += step * G[:, i]`.
    fn add_column(&mut self, i: usize, step: f64);
    fn fields(&self) -> DVector<f64>;
}

/// Precomputed Gram matrix with `u` kept up to date.
pub(crate) struct GramDual<'a> {
    pub g: &'a DMatrix<f64>,
    pub u: DVector<f64>,
}

impl DualKernel for GramDual<'_> {
    fn diag(&self, i: usize) -> f64 {
        self.g[(i, i)]
    }

    fn field(&self, i: usize) -> f64 {
        self.u[i]
    }

    fn add_column(&mut self, i: usize, step: f64) {
        self.u.axpy(step, &self.g.column(i), 1.0);
    }

    fn fields(&self) -> DVector<f64> {
        self.u.clone()
    }
}

/// Linear kernel on explicit features, one sample per column of `zt`,
/// keeping `w = Z^T (a * y)`.
pub(crate) struct FeatureDual<'a> {
    pub zt: &'a DMatrix<f64>,
    pub w: DVector<f64>,
    pub diag: Vec<f64>,
}

impl<'a> FeatureDual<'a> {
    pub fn new(zt: &'a DMatrix<f64>) -> Self {
        let diag = zt.column_iter().map(|c| c.norm_squared()).collect();
        Self { zt, w: DVector::zeros(zt.nrows()), diag }
    }
}

impl DualKernel for FeatureDual<'_> {
    fn diag(&self, i: usize) -> f64 {
        self.diag[i]
    }

    fn field(&self, i: usize) -> f64 {
        self.zt.column(i).dot(&self.w)
    }

    fn add_column(&mut self, i: usize, step: f64) {
        self.w.axpy(step, &self.zt.column(i), 1.0);
    }

    fn fields(&self) -> DVector<f64> {
        self.zt.tr_mul(&self.w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct DualOutcome {
    pub epochs: usize,
    /// Duality gap relative to `max(1, primal)`.
    pub gap: f64,
    pub converged: bool,
}

/// Primal and dual objectives of the hinge problem at multipliers `a`.
pub(crate) fn duality_gap(u: &DVector<f64>, y: &[f64], a: &[f64], lambda: f64) -> f64 {
    let mut hinge = 0.0;
    let mut mass = 0.0;
    let mut quad = 0.0;
    for i in 0..y.len() {
        hinge += (1.0 - y[i] * u[i] / lambda).max(0.0);
        mass += a[i];
        quad += a[i] * y[i] * u[i];
    }
    let primal = hinge + quad / (2.0 * lambda);
    let dual = mass - quad / (2.0 * lambda);
    (primal - dual) / primal.max(1.0)
}

/// Projected coordinate ascent on the dual of
/// `sum_i max(0, 1 - y_i f_i) + (lambda / 2) c^T G c`, where
/// `c = a * y / lambda` and `0 <= a <= 1`. `a` is the warm start.
pub(crate) fn hinge_dual<K: DualKernel>(
    k: &mut K,
    y: &[f64],
    a: &mut [f64],
    lambda: f64,
    tol: f64,
    max_epochs: usize,
) -> DualOutcome {
    let n = y.len();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut active: Vec<usize> = (0..n).collect();
    let (mut pg_max_old, mut pg_min_old) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut pg_tol = 1e-3;
    let mut gap = f64::INFINITY;
    for epoch in 1..=max_epochs {
        active.shuffle(&mut rng);
        let (mut pg_max, mut pg_min) = (f64::NEG_INFINITY, f64::INFINITY);
        let mut s = 0;
        while s < active.len() {
            let i = active[s];
            let grad = y[i] * k.field(i) / lambda - 1.0;
            let pg;
            if a[i] <= 0.0 {
                if grad > pg_max_old {
                    active.swap_remove(s);
                    continue;
                }
                pg = grad.min(0.0);
            } else if a[i] >= 1.0 {
                if grad < pg_min_old {
                    active.swap_remove(s);
                    continue;
                }
                pg = grad.max(0.0);
            } else {
                pg = grad;
            }
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg != 0.0 {
                let curv = k.diag(i) / lambda;
                let next = if curv > 0.0 {
                    (a[i] - grad / curv).clamp(0.0, 1.0)
                } else if grad < 0.0 {
                    1.0
                } else {
                    0.0
                };
                let delta = next - a[i];
                if delta != 0.0 {
                    a[i] = next;
                    k.add_column(i, delta * y[i]);
                }
            }
            s += 1;
        }
        gap = duality_gap(&k.fields(), y, a, lambda);
        if gap <= tol {
            return DualOutcome { epochs: epoch, gap, converged: true };
        }
        if pg_max - pg_min <= pg_tol || active.is_empty() {
            if active.len() == n {
                pg_tol *= 0.1;
            }
            active = (0..n).collect();
            pg_max_old = f64::INFINITY;
            pg_min_old = f64::NEG_INFINITY;
            continue;
        }
        pg_max_old = if pg_max > 0.0 { pg_max } else { f64::INFINITY };
        pg_min_old = if pg_min < 0.0 { pg_min } else { f64::NEG_INFINITY };
    }
    DualOutcome { epochs: max_epochs, gap, converged: false }
}
