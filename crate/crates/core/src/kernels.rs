//! Dot-product kernel families and their linear/nonlinear decomposition.
//!
//! A kernel `K(rho)` on normalised inputs is summarised by three
//! coefficients: `mu0 = sqrt(K(0))`, `mu1 = sqrt(K'(0))` and
//! `mu_star = sqrt(K(1) - K(0) - K'(0))`. Only the angle between the
//! linear and nonlinear parts enters the asymptotic errors.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::numerics::{bisect_root, lit, normal_pdf, GaussLegendre, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("kernel is not admissible: {0}")]
    NotAdmissible(String),
    #[error("no member of the {family} family has angle {angle}")]
    NoSolution { family: String, angle: f64 },
}

/// Linear and nonlinear coefficients of a kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelGeometry<T> {
    pub mu0: T,
    pub mu1: T,
    pub mu_star: T,
}

impl<T: Real> KernelGeometry<T> {
    pub fn new(mu0: T, mu1: T, mu_star: T) -> Result<Self, KernelError> {
        for (name, v) in [("mu0", mu0), ("mu1", mu1), ("mu_star", mu_star)] {
            if !v.is_finite() || v < T::zero() {
                return Err(KernelError::InvalidArgument(format!("{name} must be finite and >= 0")));
            }
        }
        Ok(Self { mu0, mu1, mu_star })
    }

    /// Geometry with no constant part.
    pub fn from_coefficients(mu1: T, mu_star: T) -> Result<Self, KernelError> {
        Self::new(T::zero(), mu1, mu_star)
    }

    /// Geometry on the unit circle at angle `gamma`.
    pub fn from_angle(gamma: T) -> Result<Self, KernelError> {
        if !(gamma >= T::zero() && gamma <= T::FRAC_PI_2()) {
            return Err(KernelError::InvalidArgument("angle must lie in [0, pi/2]".into()));
        }
        Self::from_coefficients(gamma.sin(), gamma.cos())
    }

    /// Angle in `[0, pi/2]` with `tan(angle) = mu1 / mu_star`.
    pub fn angle(&self) -> Result<T, KernelError> {
        angle(self.mu1, self.mu_star)
    }

    /// Same angle, coefficients multiplied by `r`.
    pub fn scaled(&self, r: T) -> Self {
        Self { mu0: self.mu0 * r, mu1: self.mu1 * r, mu_star: self.mu_star * r }
    }
}

/// Angle `atan(mu1 / mu_star)` of a geometry.
pub fn angle<T: Real>(mu1: T, mu_star: T) -> Result<T, KernelError> {
    if mu1 < T::zero() || mu_star < T::zero() || !mu1.is_finite() || !mu_star.is_finite() {
        return Err(KernelError::InvalidArgument("coefficients must be finite and >= 0".into()));
    }
    if mu1 == T::zero() && mu_star == T::zero() {
        return Err(KernelError::InvalidArgument("both coefficients vanish".into()));
    }
    Ok(mu1.atan2(mu_star))
}

/// Angle that minimises the memorisation error of ridge regression at
/// vanishing regularisation.
pub fn optimal_mem_angle<T: Real>(eps: T) -> Result<T, KernelError> {
    if !(eps >= T::zero() && eps < T::one()) {
        return Err(KernelError::InvalidArgument("fact fraction must lie in [0, 1)".into()));
    }
    let s = T::one() - eps;
    let ratio = T::FRAC_PI_2() / (s * s) - T::one();
    Ok(ratio.sqrt().recip().atan())
}

/// Coefficients of `K` by finite differences at the origin.
pub fn mu_from_kernel<T: Real, K: Fn(T) -> T>(kernel: K) -> Result<KernelGeometry<T>, KernelError> {
    let h: T = lit(1e-5);
    let two: T = lit(2.0);
    let central = |h: T| (kernel(h) - kernel(-h)) / (two * h);
    // Richardson step removes the O(h^2) term.
    let slope = (lit::<T>(4.0) * central(h / two) - central(h)) / lit(3.0);
    let k0 = kernel(T::zero());
    let k1 = kernel(T::one());
    if !(k0.is_finite() && k1.is_finite() && slope.is_finite()) {
        return Err(KernelError::NotAdmissible("kernel is not finite on [-1, 1]".into()));
    }
    let tol: T = lit(1e-8);
    if k0 < -tol {
        return Err(KernelError::NotAdmissible("K(0) < 0".into()));
    }
    if slope < -tol {
        return Err(KernelError::NotAdmissible("K'(0) < 0".into()));
    }
    let star_sq = k1 - k0 - slope;
    if star_sq < -tol {
        return Err(KernelError::NotAdmissible("K(1) - K(0) - K'(0) < 0".into()));
    }
    let clip = |v: T| v.max(T::zero()).sqrt();
    KernelGeometry::new(clip(k0), clip(slope), clip(star_sq))
}

/// Coefficients of the kernel induced by an activation on Gaussian inputs.
pub fn mu_from_activation<T: Real, S: Fn(T) -> T>(
    activation: S,
) -> Result<KernelGeometry<T>, KernelError> {
    let rule = GaussLegendre::<T>::new(20).expect("positive order");
    let tol: T = lit(1e-15);
    let edge: T = lit(12.0);
    // Split at the origin, where common activations have their kinks.
    let moment = |g: &dyn Fn(T) -> T| {
        rule.integrate_adaptive(-edge, T::zero(), tol, |x| normal_pdf(x) * g(x))
            + rule.integrate_adaptive(T::zero(), edge, tol, |x| normal_pdf(x) * g(x))
    };
    let mu0 = moment(&|x| activation(x));
    let mu1 = moment(&|x| x * activation(x));
    let second = moment(&|x| activation(x) * activation(x));
    let star_sq = second - mu0 * mu0 - mu1 * mu1;
    if !(star_sq.is_finite() && mu0.is_finite()) {
        return Err(KernelError::NotAdmissible("activation moments diverge".into()));
    }
    if mu1 < T::zero() {
        return Err(KernelError::NotAdmissible(
            "activation has negative linear coefficient; flip its sign".into(),
        ));
    }
    KernelGeometry::new(mu0.abs(), mu1, star_sq.max(T::zero()).sqrt())
}

/// Elementwise activations used by random-feature models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Linear,
    Sign,
    Erf,
    Relu,
    Tanh,
}

impl Activation {
    pub fn apply<T: Real>(self, x: T) -> T {
        match self {
            Activation::Linear => x,
            Activation::Sign => {
                if x >= T::zero() {
                    T::one()
                } else {
                    -T::one()
                }
            }
            Activation::Erf => x.erf(),
            Activation::Relu => x.max(T::zero()),
            Activation::Tanh => x.tanh(),
        }
    }

    /// Kernel induced on correlated standard Gaussians, when it has a closed form.
    pub fn kernel(self) -> Option<KernelFamily> {
        match self {
            Activation::Linear => Some(KernelFamily::Linear),
            Activation::Sign => Some(KernelFamily::SignArcsine),
            Activation::Erf => Some(KernelFamily::ErfArcsine),
            Activation::Relu => Some(KernelFamily::ReluArccos),
            Activation::Tanh => None,
        }
    }

    pub fn geometry(self) -> Result<KernelGeometry<f64>, KernelError> {
        match self.kernel() {
            Some(k) => k.geometry(),
            None => mu_from_activation(|x: f64| self.apply(x)),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Activation::Linear => "linear",
            Activation::Sign => "sign",
            Activation::Erf => "erf",
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
        };
        f.write_str(s)
    }
}

impl FromStr for Activation {
    type Err = KernelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "linear" | "identity" => Ok(Activation::Linear),
            "sign" => Ok(Activation::Sign),
            "erf" => Ok(Activation::Erf),
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            other => Err(KernelError::InvalidArgument(format!("unknown activation {other:?}"))),
        }
    }
}

/// Named kernel families with their parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelFamily {
    /// `rho`
    Linear,
    /// `(2/pi) asin(rho)`
    SignArcsine,
    /// `(2/pi) asin(2 rho / 3)`
    ErfArcsine,
    /// `(sqrt(1 - rho^2) + (pi - acos(rho)) rho) / (2 pi)`
    ReluArccos,
    /// `(c + rho)^degree`
    Polynomial { c: f64, degree: u32 },
    /// `exp(beta rho)`
    Exponential { beta: f64 },
    /// `exp(-eta (1 - rho))`
    SphericalGaussian { eta: f64 },
    /// `1 / (1 - g rho)`
    Geometric { g: f64 },
    /// `mu1^2 rho + mu_star^2 rho^2`
    TruncatedQuadratic { mu1: f64, mu_star: f64 },
}

/// Parameter-free tag of a [`KernelFamily`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    Linear,
    SignArcsine,
    ErfArcsine,
    ReluArccos,
    Polynomial { degree: u32 },
    Exponential,
    SphericalGaussian,
    Geometric,
    TruncatedQuadratic,
}

impl KernelFamily {
    pub fn validate(&self) -> Result<(), KernelError> {
        let problem = match *self {
            KernelFamily::Polynomial { c, degree } if !(c >= 0.0 && c.is_finite()) || degree == 0 => {
                "polynomial kernel needs c >= 0 and degree >= 1"
            }
            KernelFamily::Exponential { beta } if !(beta > 0.0 && beta < 700.0) => {
                "exponential kernel needs 0 < beta < 700"
            }
            KernelFamily::SphericalGaussian { eta } if !(eta > 0.0 && eta.is_finite()) => {
                "gaussian kernel needs eta > 0"
            }
            KernelFamily::Geometric { g } if !(g > 0.0 && g < 1.0) => "geometric kernel needs 0 < g < 1",
            KernelFamily::TruncatedQuadratic { mu1, mu_star }
                if !(mu1 >= 0.0 && mu_star >= 0.0 && mu1.is_finite() && mu_star.is_finite()) =>
            {
                "quadratic kernel needs finite mu1, mu_star >= 0"
            }
            _ => return Ok(()),
        };
        Err(KernelError::InvalidArgument(problem.into()))
    }

    /// Kernel value at normalised overlap `rho`.
    pub fn eval(&self, rho: f64) -> f64 {
        use std::f64::consts::PI;
        let rho = rho.clamp(-1.0, 1.0);
        match *self {
            KernelFamily::Linear => rho,
            KernelFamily::SignArcsine => 2.0 / PI * rho.asin(),
            KernelFamily::ErfArcsine => 2.0 / PI * (2.0 * rho / 3.0).asin(),
            KernelFamily::ReluArccos => {
                ((1.0 - rho * rho).max(0.0).sqrt() + (PI - rho.acos()) * rho) / (2.0 * PI)
            }
            KernelFamily::Polynomial { c, degree } => (c + rho).powi(degree as i32),
            KernelFamily::Exponential { beta } => (beta * rho).exp(),
            KernelFamily::SphericalGaussian { eta } => (-eta * (1.0 - rho)).exp(),
            KernelFamily::Geometric { g } => 1.0 / (1.0 - g * rho),
            KernelFamily::TruncatedQuadratic { mu1, mu_star } => {
                mu1 * mu1 * rho + mu_star * mu_star * rho * rho
            }
        }
    }

    /// Closed-form coefficients.
    pub fn geometry(&self) -> Result<KernelGeometry<f64>, KernelError> {
        use std::f64::consts::PI;
        self.validate()?;
        let (mu0, mu1, mu_star) = match *self {
            KernelFamily::Linear => (0.0, 1.0, 0.0),
            KernelFamily::SignArcsine => (0.0, (2.0 / PI).sqrt(), (1.0 - 2.0 / PI).sqrt()),
            KernelFamily::ErfArcsine => (
                0.0,
                2.0 / (3.0 * PI).sqrt(),
                (2.0 / PI * (2.0f64 / 3.0).asin() - 4.0 / (3.0 * PI)).sqrt(),
            ),
            KernelFamily::ReluArccos => {
                ((2.0 * PI).sqrt().recip(), 0.5, (0.5 * (0.5 - 1.0 / PI)).sqrt())
            }
            KernelFamily::Polynomial { c, degree } => {
                let m = degree as i32;
                let lin = f64::from(degree) * c.powi(m - 1);
                let star = ((c + 1.0).powi(m) - c.powi(m) - lin).max(0.0);
                (c.powi(m).sqrt(), lin.sqrt(), star.sqrt())
            }
            KernelFamily::Exponential { beta } => (1.0, beta.sqrt(), exp_excess(beta).sqrt()),
            KernelFamily::SphericalGaussian { eta } => {
                ((-eta / 2.0).exp(), (eta * (-eta).exp()).sqrt(), gauss_excess(eta).sqrt())
            }
            KernelFamily::Geometric { g } => (1.0, g.sqrt(), g / (1.0 - g).sqrt()),
            KernelFamily::TruncatedQuadratic { mu1, mu_star } => (0.0, mu1, mu_star),
        };
        KernelGeometry::new(mu0, mu1, mu_star)
    }

    pub fn kind(&self) -> FamilyKind {
        match *self {
            KernelFamily::Linear => FamilyKind::Linear,
            KernelFamily::SignArcsine => FamilyKind::SignArcsine,
            KernelFamily::ErfArcsine => FamilyKind::ErfArcsine,
            KernelFamily::ReluArccos => FamilyKind::ReluArccos,
            KernelFamily::Polynomial { degree, .. } => FamilyKind::Polynomial { degree },
            KernelFamily::Exponential { .. } => FamilyKind::Exponential,
            KernelFamily::SphericalGaussian { .. } => FamilyKind::SphericalGaussian,
            KernelFamily::Geometric { .. } => FamilyKind::Geometric,
            KernelFamily::TruncatedQuadratic { .. } => FamilyKind::TruncatedQuadratic,
        }
    }

    /// Short name used on the command line.
    pub fn name(&self) -> &'static str {
        self.kind().name()
    }
}

impl FamilyKind {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::Linear => "linear",
            FamilyKind::SignArcsine => "sign",
            FamilyKind::ErfArcsine => "erf",
            FamilyKind::ReluArccos => "relu",
            FamilyKind::Polynomial { .. } => "poly",
            FamilyKind::Exponential => "exp",
            FamilyKind::SphericalGaussian => "gaussian",
            FamilyKind::Geometric => "geometric",
            FamilyKind::TruncatedQuadratic => "quadratic",
        }
    }
}

/// `e^beta - 1 - beta` without cancellation at small `beta`.
fn exp_excess(beta: f64) -> f64 {
    if beta < 1e-3 {
        beta * beta / 2.0 * (1.0 + beta / 3.0 + beta * beta / 12.0)
    } else {
        beta.exp_m1() - beta
    }
}

/// `1 - e^{-eta} (1 + eta)` without cancellation at small `eta`.
fn gauss_excess(eta: f64) -> f64 {
    if eta < 1e-3 {
        eta * eta / 2.0 * (1.0 - 2.0 * eta / 3.0 + eta * eta / 4.0)
    } else {
        -(-eta).exp_m1() - eta * (-eta).exp()
    }
}

/// Member of `kind` whose geometry has angle `gamma`.
pub fn match_family_to_angle(kind: FamilyKind, gamma: f64) -> Result<KernelFamily, KernelError> {
    use std::f64::consts::FRAC_PI_2;
    let none = || KernelError::NoSolution { family: kind.name().into(), angle: gamma };
    if !(0.0..=FRAC_PI_2).contains(&gamma) {
        return Err(KernelError::InvalidArgument("angle must lie in [0, pi/2]".into()));
    }
    if let FamilyKind::TruncatedQuadratic = kind {
        return Ok(KernelFamily::TruncatedQuadratic { mu1: gamma.sin(), mu_star: gamma.cos() });
    }
    if gamma <= 0.0 || gamma >= FRAC_PI_2 {
        return Err(none());
    }
    let target = gamma.tan().powi(2);
    // Each one-parameter family is searched on a log scale of its parameter.
    let (build, lo, hi): (Box<dyn Fn(f64) -> KernelFamily>, f64, f64) = match kind {
        FamilyKind::Geometric => {
            let g = gamma.cos().powi(2);
            return Ok(KernelFamily::Geometric { g });
        }
        FamilyKind::Exponential => {
            (Box::new(|beta| KernelFamily::Exponential { beta }), 1e-6, 699.0)
        }
        FamilyKind::SphericalGaussian => {
            (Box::new(|eta| KernelFamily::SphericalGaussian { eta }), 1e-6, 700.0)
        }
        FamilyKind::Polynomial { degree } if degree >= 2 => {
            (Box::new(move |c| KernelFamily::Polynomial { c, degree }), 1e-8, 1e8)
        }
        _ => return Err(none()),
    };
    let log_ratio = |t: f64| -> f64 {
        match build(t.exp()).geometry() {
            Ok(g) => 2.0 * (g.mu1.ln() - g.mu_star.ln()) - target.ln(),
            Err(_) => f64::NAN,
        }
    };
    let root = bisect_root(log_ratio, lo.ln(), hi.ln(), 1e-14).map_err(|_| none())?;
    Ok(build(root.exp()))
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            KernelFamily::Polynomial { c, degree } => write!(f, "poly(c={c}, degree={degree})"),
            KernelFamily::Exponential { beta } => write!(f, "exp(beta={beta})"),
            KernelFamily::SphericalGaussian { eta } => write!(f, "gaussian(eta={eta})"),
            KernelFamily::Geometric { g } => write!(f, "geometric(g={g})"),
            KernelFamily::TruncatedQuadratic { mu1, mu_star } => {
                write!(f, "quadratic(mu1={mu1}, mustar={mu_star})")
            }
            other => f.write_str(other.name()),
        }
    }
}

/// Parses the [`Display`](fmt::Display) form, e.g. `relu` or `gaussian(eta=1.205)`.
impl FromStr for KernelFamily {
    type Err = KernelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |m: String| KernelError::InvalidArgument(m);
        let s = s.trim();
        let (name, body) = match s.find('(') {
            Some(open) if s.ends_with(')') => (&s[..open], &s[open + 1..s.len() - 1]),
            Some(_) => return Err(bad(format!("unbalanced parameters in {s:?}"))),
            None => (s, ""),
        };
        let mut params = Vec::new();
        for item in body.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (k, v) = item.split_once('=').ok_or_else(|| bad(format!("expected key=value, got {item:?}")))?;
            let v: f64 = v.trim().parse().map_err(|_| bad(format!("{} is not a number", v.trim())))?;
            params.push((k.trim().to_ascii_lowercase(), v));
        }
        let name = name.trim().to_ascii_lowercase();
        let mut take = |key: &str| -> Result<f64, KernelError> {
            let pos = params
                .iter()
                .position(|(k, _)| k == key)
                .ok_or_else(|| bad(format!("kernel {name} needs parameter {key}")))?;
            Ok(params.remove(pos).1)
        };
        let family = match name.as_str() {
            "linear" => KernelFamily::Linear,
            "sign" => KernelFamily::SignArcsine,
            "erf" => KernelFamily::ErfArcsine,
            "relu" => KernelFamily::ReluArccos,
            "poly" => {
                let c = take("c")?;
                let degree = take("degree")?;
                if degree.fract() != 0.0 || !(1.0..=64.0).contains(&degree) {
                    return Err(bad("polynomial degree must be an integer in [1, 64]".into()));
                }
                KernelFamily::Polynomial { c, degree: degree as u32 }
            }
            "exp" => KernelFamily::Exponential { beta: take("beta")? },
            "gaussian" => KernelFamily::SphericalGaussian { eta: take("eta")? },
            "geometric" => KernelFamily::Geometric { g: take("g")? },
            "quadratic" => KernelFamily::TruncatedQuadratic { mu1: take("mu1")?, mu_star: take("mustar")? },
            other => return Err(bad(format!("unknown kernel {other:?}"))),
        };
        if let Some((k, _)) = params.first() {
            return Err(bad(format!("kernel {name} has no parameter {k}")));
        }
        family.validate()?;
        Ok(family)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn gaussian_kernel_coefficients_by_differences() {
        let fam = KernelFamily::SphericalGaussian { eta: 1.0 };
        let g = mu_from_kernel(|r: f64| fam.eval(r)).unwrap();
        assert!(close(g.mu1, 0.60653, 1e-5), "{}", g.mu1);
        assert!(close(g.mu_star, (1.0 - 2.0 / std::f64::consts::E).sqrt(), 1e-9), "{}", g.mu_star);
        let exact = fam.geometry().unwrap();
        assert!(close(g.mu1, exact.mu1, 1e-9) && close(g.mu_star, exact.mu_star, 1e-9));
    }

    #[test]
    fn non_psd_kernel_is_rejected() {
        let err = mu_from_kernel(|r: f64| r - r * r).unwrap_err();
        assert!(matches!(err, KernelError::NotAdmissible(_)));
    }

    #[test]
    fn relu_activation_coefficients() {
        let g = mu_from_activation(|x: f64| x.max(0.0)).unwrap();
        assert!(close(g.mu0, 0.39894, 1e-5));
        assert!(close(g.mu1, 0.5, 1e-10));
        assert!(close(g.mu_star, 0.301405, 1e-6), "{}", g.mu_star);
    }

    #[test]
    fn activation_kernels_agree_with_closed_forms() {
        for act in [Activation::Sign, Activation::Erf, Activation::Relu, Activation::Linear] {
            let quad = mu_from_activation(|x: f64| act.apply(x)).unwrap();
            let exact = act.kernel().unwrap().geometry().unwrap();
            assert!(close(quad.mu0, exact.mu0, 1e-10), "{act}");
            assert!(close(quad.mu1, exact.mu1, 1e-10), "{act}");
            assert!(close(quad.mu_star, exact.mu_star, 1e-7), "{act}");
        }
    }

    #[test]
    fn family_differences_match_closed_forms() {
        let families = [
            KernelFamily::SignArcsine,
            KernelFamily::ErfArcsine,
            KernelFamily::ReluArccos,
            KernelFamily::Polynomial { c: 0.5, degree: 3 },
            KernelFamily::Exponential { beta: 0.7 },
            KernelFamily::Geometric { g: 0.4 },
            KernelFamily::TruncatedQuadratic { mu1: 0.3, mu_star: 0.8 },
        ];
        for fam in families {
            let exact = fam.geometry().unwrap();
            let diff = mu_from_kernel(|r: f64| fam.eval(r)).unwrap();
            assert!(close(exact.mu0, diff.mu0, 1e-8), "{fam}");
            assert!(close(exact.mu1, diff.mu1, 1e-6), "{fam}");
            assert!(close(exact.mu_star, diff.mu_star, 1e-5), "{fam}");
        }
    }

    #[test]
    fn family_strings_round_trip() {
        let families = [
            KernelFamily::ReluArccos,
            KernelFamily::Polynomial { c: 0.5, degree: 3 },
            KernelFamily::SphericalGaussian { eta: 1.205 },
            KernelFamily::TruncatedQuadratic { mu1: 0.3, mu_star: 0.8 },
        ];
        for fam in families {
            assert_eq!(fam.to_string().parse::<KernelFamily>().unwrap(), fam);
        }
        assert!("gaussian".parse::<KernelFamily>().is_err());
        assert!("exp(beta=1, eta=2)".parse::<KernelFamily>().is_err());
        assert!("geometric(g=2)".parse::<KernelFamily>().is_err());
    }

    #[test]
    fn angle_edge_cases() {
        let sign = KernelFamily::SignArcsine.geometry().unwrap();
        assert!(close(sign.angle().unwrap(), 0.9238, 1e-4));
        assert!(close(angle(1.0, 0.0).unwrap(), PI / 2.0, 1e-15));
        assert!(matches!(angle(0.0, 0.0), Err(KernelError::InvalidArgument(_))));
    }

    #[test]
    fn optimal_angle_values() {
        assert!(close(optimal_mem_angle(0.1).unwrap(), 0.8011, 1e-4));
        assert!(close(optimal_mem_angle(0.0).unwrap(), 0.9238, 1e-4));
        assert!(optimal_mem_angle(1.0).is_err());
    }

    #[test]
    fn matched_families_hit_target_angle() {
        let gamma = optimal_mem_angle(0.1).unwrap();
        for kind in [
            FamilyKind::Exponential,
            FamilyKind::SphericalGaussian,
            FamilyKind::Geometric,
            FamilyKind::Polynomial { degree: 2 },
            FamilyKind::TruncatedQuadratic,
        ] {
            let fam = match_family_to_angle(kind, gamma).unwrap();
            let got = fam.geometry().unwrap().angle().unwrap();
            assert!(close(got, gamma, 1e-10), "{fam}: {got} vs {gamma}");
        }
        let fam = match_family_to_angle(FamilyKind::SphericalGaussian, gamma).unwrap();
        match fam {
            KernelFamily::SphericalGaussian { eta } => assert!(close(eta, 1.205, 1e-3), "{eta}"),
            _ => unreachable!(),
        }
        let fam = match_family_to_angle(FamilyKind::Geometric, gamma).unwrap();
        assert_eq!(fam, KernelFamily::Geometric { g: gamma.cos().powi(2) });
    }

    #[test]
    fn fixed_families_have_no_free_parameter() {
        let err = match_family_to_angle(FamilyKind::ReluArccos, 0.5).unwrap_err();
        assert!(matches!(err, KernelError::NoSolution { .. }));
        let err = match_family_to_angle(FamilyKind::Polynomial { degree: 1 }, 0.5).unwrap_err();
        assert!(matches!(err, KernelError::NoSolution { .. }));
    }
}
