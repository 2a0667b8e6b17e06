use super::real::{lit, Real};
use super::NumericsError;

/// Root of `f` in `[lo, hi]` by bisection. The endpoints must bracket a sign change.
pub fn bisect_root<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    lo: T,
    hi: T,
    tol: T,
) -> Result<T, NumericsError> {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a);
    let fb = f(b);
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(NumericsError::Bracket {
            lo: lo.to_f64().unwrap_or(f64::NAN),
            hi: hi.to_f64().unwrap_or(f64::NAN),
        });
    }
    let half: T = lit(0.5);
    for _ in 0..2000 {
        let mid = half * (a + b);
        if (b - a) <= tol || mid <= a || mid >= b {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == T::zero() {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(half * (a + b))
}

/// Minimiser of a unimodal `f` on `[lo, hi]` by golden-section search.
/// Returns `(argmin, min)`.
pub fn golden_section_min<T: Real, E, F: FnMut(T) -> Result<T, E>>(
    mut f: F,
    lo: T,
    hi: T,
    tol: T,
) -> Result<(T, T), E> {
    let inv_phi: T = lit(0.618_033_988_749_894_8);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    let fa = f(a)?;
    let fb = f(b)?;
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for cand in [(a, fa), (b, fb)] {
        if cand.1 < best.1 {
            best = cand;
        }
    }
    Ok(best)
}

/// Settings for [`damped_fixed_point`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointConfig<T> {
    /// Weight kept on the previous iterate.
    pub damping: T,
    /// Stop when every component moves by less than `tol` relative to its size.
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Real> Default for FixedPointConfig<T> {
    fn default() -> Self {
        Self { damping: lit(0.5), tol: lit(1e-10), max_iter: 100_000 }
    }
}

/// Result of a fixed-point run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointOutcome<T, const N: usize> {
    pub x: [T; N],
    pub iterations: usize,
    pub converged: bool,
}

/// Iterates `x <- damping * x + (1 - damping) * map(x)`.
///
/// Errors from `map` abort the run. Non-convergence is reported through the
/// outcome, not as an error.
pub fn damped_fixed_point<T: Real, E, const N: usize, F>(
    mut map: F,
    init: [T; N],
    cfg: &FixedPointConfig<T>,
) -> Result<FixedPointOutcome<T, N>, E>
where
    F: FnMut(&[T; N]) -> Result<[T; N], E>,
{
    let mut x = init;
    let keep = cfg.damping;
    let take = T::one() - keep;
    for it in 1..=cfg.max_iter {
        let y = map(&x)?;
        let mut done = true;
        let mut next = x;
        for i in 0..N {
            next[i] = keep * x[i] + take * y[i];
            let scale = x[i].abs().max(next[i].abs());
            if !((next[i] - x[i]).abs() <= cfg.tol * scale) {
                done = false;
            }
        }
        x = next;
        if done {
            return Ok(FixedPointOutcome { x, iterations: it, converged: true });
        }
    }
    Ok(FixedPointOutcome { x, iterations: cfg.max_iter, converged: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_reference_roots() {
        let r = bisect_root(|x: f64| x * x - 2.0, 0.0, 2.0, 1e-15).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
        let r = bisect_root(|x: f64| x, -1.0, 1.0, 1e-15).unwrap();
        assert!(r.abs() < 1e-15);
        let r = bisect_root(|x: f64| libm::erf(x) - 0.5, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 0.476_936_276_2).abs() < 1e-10);
    }

    #[test]
    fn bisection_rejects_missing_bracket() {
        let err = bisect_root(|x: f64| x * x + 1.0, -1.0, 1.0, 1e-12).unwrap_err();
        assert!(matches!(err, NumericsError::Bracket { .. }));
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, fx) =
            golden_section_min(|x: f64| Ok::<_, ()>((x - 0.3).powi(2) + 1.0), -2.0, 5.0, 1e-10)
                .unwrap();
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fixed_point_of_cosine() {
        let cfg = FixedPointConfig::default();
        let out = damped_fixed_point(|x: &[f64; 1]| Ok::<_, ()>([x[0].cos()]), [1.0], &cfg).unwrap();
        assert!(out.converged);
        assert!((out.x[0] - 0.739_085_133_215_160_6).abs() < 1e-9);
    }

    #[test]
    fn fixed_point_reports_exhaustion() {
        let cfg = FixedPointConfig { damping: 0.0, tol: 1e-12, max_iter: 5 };
        let out = damped_fixed_point(|x: &[f64; 1]| Ok::<_, ()>([x[0] + 1.0]), [0.0], &cfg).unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations, 5);
    }
}
