use super::real::{from_usize, lit, Real};
use super::NumericsError;

/// Default node count for Gaussian expectations.
pub const DEFAULT_HERMITE_ORDER: usize = 400;

/// Gauss-Hermite rule for expectations under the standard normal law.
///
/// Weights sum to one, so `expect` returns `E[f(Z)]` directly.
#[derive(Debug, Clone)]
pub struct GaussHermite<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussHermite<T> {
    /// Builds the rule with the Golub-Welsch construction.
    pub fn new(order: usize) -> Result<Self, NumericsError> {
        if order == 0 {
            return Err(NumericsError::InvalidArgument("quadrature order must be positive".into()));
        }
        // Jacobi matrix of the monic probabilists' Hermite polynomials.
        let mut diag = vec![0.0_f64; order];
        let mut off = vec![0.0_f64; order];
        for (k, o) in off.iter_mut().enumerate().skip(1) {
            *o = (k as f64).sqrt();
        }
        let mut first_row = vec![0.0_f64; order];
        first_row[0] = 1.0;
        tridiagonal_ql(&mut diag, &mut off, &mut first_row)?;

        let mut pairs: Vec<(f64, f64)> =
            diag.iter().zip(&first_row).map(|(&x, &z)| (x, z * z)).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        // Enforce the exact reflection symmetry of the rule.
        let n = order;
        for i in 0..n / 2 {
            let j = n - 1 - i;
            let x = 0.5 * (pairs[j].0 - pairs[i].0);
            let w = 0.5 * (pairs[j].1 + pairs[i].1);
            pairs[i] = (-x, w);
            pairs[j] = (x, w);
        }
        if n % 2 == 1 {
            pairs[n / 2].0 = 0.0;
        }
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        Ok(Self {
            nodes: pairs.iter().map(|p| lit(p.0)).collect(),
            weights: pairs.iter().map(|p| lit(p.1 / total)).collect(),
        })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// `E[f(Z)]` for `Z ~ N(0, 1)`.
    pub fn expect<F: FnMut(T) -> T>(&self, mut f: F) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .filter(|(_, &w)| w > T::zero())
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Implicit QL on a symmetric tridiagonal matrix.
///
/// On return `diag` holds the eigenvalues and `z` the first row of the
/// eigenvector matrix (pass `z = e_1`). `off[i]` couples rows `i-1` and `i`.
fn tridiagonal_ql(diag: &mut [f64], off: &mut [f64], z: &mut [f64]) -> Result<(), NumericsError> {
    let n = diag.len();
    if n == 1 {
        return Ok(());
    }
    for i in 1..n {
        off[i - 1] = off[i];
    }
    off[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(NumericsError::NoConvergence { iterations: iter });
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let mut f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if underflow {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(())
}

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    pub fn new(order: usize) -> Result<Self, NumericsError> {
        if order == 0 {
            return Err(NumericsError::InvalidArgument("quadrature order must be positive".into()));
        }
        let n = order;
        let mut nodes = vec![0.0_f64; n];
        let mut weights = vec![0.0_f64; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d.is_finite() {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(Self {
            nodes: nodes.into_iter().map(lit).collect(),
            weights: weights.into_iter().map(lit).collect(),
        })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Integral of `f` over `[a, b]`.
    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let half = lit::<T>(0.5) * (b - a);
        let mid = lit::<T>(0.5) * (b + a);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<T>()
    }

    /// Sum of the rule applied on `panels` equal sub-intervals of `[a, b]`.
    pub fn integrate_panels<F: FnMut(T) -> T>(&self, a: T, b: T, panels: usize, mut f: F) -> T {
        let width = (b - a) / from_usize(panels.max(1));
        (0..panels.max(1))
            .map(|k| {
                let lo = a + width * from_usize(k);
                self.integrate(lo, lo + width, &mut f)
            })
            .sum()
    }

    /// Adaptive integral: a panel is accepted when its estimate agrees with
    /// the sum over its two halves to within `tol`.
    pub fn integrate_adaptive<F: FnMut(T) -> T>(&self, a: T, b: T, tol: T, mut f: F) -> T {
        let whole = self.integrate(a, b, &mut f);
        self.adapt(a, b, whole, tol, 0, &mut f)
    }

    fn adapt<F: FnMut(T) -> T>(&self, a: T, b: T, whole: T, tol: T, depth: u32, f: &mut F) -> T {
        let mid = lit::<T>(0.5) * (a + b);
        let left = self.integrate(a, mid, &mut *f);
        let right = self.integrate(mid, b, &mut *f);
        let split = left + right;
        // Differences at the level of rounding noise, or non-finite
        // estimates, cannot improve by splitting.
        let noise = lit::<T>(64.0) * T::epsilon() * (left.abs() + right.abs());
        if (split - whole).abs() <= tol.max(noise) || depth >= 40 || !split.is_finite() {
            return split;
        }
        let half_tol = lit::<T>(0.5) * tol;
        self.adapt(a, mid, left, half_tol, depth + 1, f)
            + self.adapt(mid, b, right, half_tol, depth + 1, f)
    }
}

/// Legendre polynomial of degree `n` and its derivative at `x`.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn double_factorial_odd(k: u32) -> f64 {
        (1..=k).step_by(2).map(f64::from).product()
    }

    #[test]
    fn hermite_low_orders() {
        let g1 = GaussHermite::<f64>::new(1).unwrap();
        assert_eq!(g1.nodes(), &[0.0]);
        assert!((g1.weights()[0] - 1.0).abs() < 1e-15);
        let g2 = GaussHermite::<f64>::new(2).unwrap();
        assert!((g2.nodes()[0] + 1.0).abs() < 1e-14 && (g2.nodes()[1] - 1.0).abs() < 1e-14);
        assert!((g2.weights()[0] - 0.5).abs() < 1e-14);
        assert!(GaussHermite::<f64>::new(0).is_err());
    }

    #[test]
    fn hermite_is_exact_up_to_degree_2n_minus_1() {
        for n in 1..=20 {
            let g = GaussHermite::<f64>::new(n).unwrap();
            for deg in 0..(2 * n as u32) {
                let got = g.expect(|x| x.powi(deg as i32));
                let want = if deg % 2 == 1 { 0.0 } else { double_factorial_odd(deg.saturating_sub(1)) };
                let scale = g.expect(|x| x.abs().powi(deg as i32)).max(1.0);
                assert!((got - want).abs() <= 1e-12 * scale, "n={n} deg={deg}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn default_order_is_normalised_and_accurate() {
        let g = GaussHermite::<f64>::new(DEFAULT_HERMITE_ORDER).unwrap();
        let total: f64 = g.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        // E[cos Z] = exp(-1/2)
        assert!((g.expect(f64::cos) - (-0.5f64).exp()).abs() < 1e-13);
        assert!((g.expect(|x| x * x * x * x) - 3.0).abs() < 1e-11);
    }

    #[test]
    fn legendre_integrates_polynomials_and_smooth_functions() {
        let g = GaussLegendre::<f64>::new(12).unwrap();
        let got = g.integrate(0.0, 2.0, |x| x.powi(23));
        assert!((got - 2f64.powi(24) / 24.0).abs() < 1e-8 * got);
        let got = g.integrate_panels(0.0, std::f64::consts::PI, 4, f64::sin);
        assert!((got - 2.0).abs() < 1e-14);
        let g = GaussLegendre::<f64>::new(15).unwrap();
        let got = g.integrate_adaptive(-1.0, 1.0, 1e-14, |x| libm::erf(1e4 * x));
        assert!(got.abs() < 1e-12);
        let got = g.integrate_adaptive(0.0, 1.0, 1e-14, |x| x.sqrt());
        assert!((got - 2.0 / 3.0).abs() < 1e-12);
    }
}
