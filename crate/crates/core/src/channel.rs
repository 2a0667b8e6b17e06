//! Teacher output channel and proximal maps of the training losses.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::numerics::{erfcx, lit, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Binary label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Neg,
    Pos,
}

impl Label {
    pub const BOTH: [Label; 2] = [Label::Neg, Label::Pos];

    pub fn value<T: Real>(self) -> T {
        match self {
            Label::Neg => -T::one(),
            Label::Pos => T::one(),
        }
    }

    /// Label of `x`, with zero mapped to `Pos`.
    pub fn of<T: Real>(x: T) -> Self {
        if x >= T::zero() {
            Label::Pos
        } else {
            Label::Neg
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Label::Neg => Label::Pos,
            Label::Pos => Label::Neg,
        }
    }
}

/// Training loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Loss {
    /// `(y - z)^2 / 2`
    Square,
    /// `max(0, 1 - y z)`
    Hinge,
}

impl Loss {
    pub fn value<T: Real>(self, y: Label, z: T) -> T {
        let y: T = y.value();
        match self {
            Loss::Square => lit::<T>(0.5) * (y - z) * (y - z),
            Loss::Hinge => (T::one() - y * z).max(T::zero()),
        }
    }
}

impl fmt::Display for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Loss::Square => "square",
            Loss::Hinge => "hinge",
        })
    }
}

impl FromStr for Loss {
    type Err = ChannelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "square" | "krr" | "ridge" => Ok(Loss::Square),
            "hinge" | "svm" => Ok(Loss::Hinge),
            other => Err(ChannelError::InvalidArgument(format!("unknown loss {other:?}"))),
        }
    }
}

fn check_positive<T: Real>(name: &str, v: T) -> Result<(), ChannelError> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(ChannelError::InvalidArgument(format!("{name} must be positive and finite")))
    }
}

fn check_eps<T: Real>(eps: T) -> Result<(), ChannelError> {
    if eps >= T::zero() && eps <= T::one() {
        Ok(())
    } else {
        Err(ChannelError::InvalidArgument("fact fraction must lie in [0, 1]".into()))
    }
}

/// Teacher partition function: probability of label `y` given a Gaussian
/// rule field with mean `omega` and variance `tau`.
pub fn z_out_star<T: Real>(y: Label, omega: T, tau: T, eps: T) -> Result<T, ChannelError> {
    check_positive("tau", tau)?;
    check_eps(eps)?;
    let half: T = lit(0.5);
    let s = -y.value::<T>() * omega / (lit::<T>(2.0) * tau).sqrt();
    Ok(half * (eps + (T::one() - eps) * s.erfc()))
}

/// `d/d omega log z_out_star`.
pub fn f_out_star<T: Real>(y: Label, omega: T, tau: T, eps: T) -> Result<T, ChannelError> {
    check_positive("tau", tau)?;
    check_eps(eps)?;
    let yv: T = y.value();
    let rest = T::one() - eps;
    let s = -yv * omega / (lit::<T>(2.0) * tau).sqrt();
    let scale = lit::<T>(2.0) / (T::TAU() * tau).sqrt();
    let denom = if s > T::zero() {
        // erfc(s) = erfcx(s) e^{-s^2}; divide the Gaussian factor out.
        let floor = if eps > T::zero() { eps * (s * s).exp() } else { T::zero() };
        floor + rest * erfcx(s)
    } else {
        (eps + rest * s.erfc()) * (s * s).exp()
    };
    Ok(yv * rest * scale / denom)
}

/// Proximal map `argmin_z (z - omega)^2 / (2 v) + loss(y, z)`.
pub fn prox<T: Real>(loss: Loss, y: Label, omega: T, v: T) -> Result<T, ChannelError> {
    check_positive("V", v)?;
    let yv: T = y.value();
    Ok(match loss {
        Loss::Square => (omega + v * yv) / (T::one() + v),
        Loss::Hinge => {
            let margin = yv * omega;
            if margin < T::one() - v {
                omega + v * yv
            } else if margin <= T::one() {
                yv
            } else {
                omega
            }
        }
    })
}

/// `(prox - omega) / v`.
pub fn f_out<T: Real>(loss: Loss, y: Label, omega: T, v: T) -> Result<T, ChannelError> {
    check_positive("V", v)?;
    let yv: T = y.value();
    Ok(match loss {
        Loss::Square => (yv - omega) / (T::one() + v),
        Loss::Hinge => {
            let margin = yv * omega;
            if margin < T::one() - v {
                yv
            } else if margin <= T::one() {
                (yv - omega) / v
            } else {
                T::zero()
            }
        }
    })
}

/// `d f_out / d omega`.
pub fn d_f_out_d_omega<T: Real>(loss: Loss, y: Label, omega: T, v: T) -> Result<T, ChannelError> {
    check_positive("V", v)?;
    Ok(match loss {
        Loss::Square => -(T::one() + v).recip(),
        Loss::Hinge => {
            let margin = y.value::<T>() * omega;
            if margin >= T::one() - v && margin <= T::one() {
                -v.recip()
            } else {
                T::zero()
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let z = z_out_star(Label::Pos, 1e6_f64, 1.0, 0.2).unwrap();
        assert!((z - 0.9).abs() < 1e-15);
        let f = f_out_star(Label::Pos, 0.0_f64, 1.0, 0.0).unwrap();
        assert!((f - 0.79788).abs() < 1e-5);
        assert_eq!(prox(Loss::Square, Label::Pos, 0.0, 1.0).unwrap(), 0.5);
        assert_eq!(prox(Loss::Hinge, Label::Pos, 0.0, 0.5).unwrap(), 0.5);
    }

    #[test]
    fn rejects_non_positive_scales() {
        assert!(z_out_star(Label::Pos, 0.0, 0.0, 0.1).is_err());
        assert!(f_out_star(Label::Pos, 0.0, -1.0, 0.1).is_err());
        assert!(prox(Loss::Square, Label::Pos, 0.0, 0.0).is_err());
        assert!(f_out(Loss::Hinge, Label::Neg, 0.0, -2.0).is_err());
        assert!(d_f_out_d_omega(Loss::Hinge, Label::Neg, 0.0, 0.0).is_err());
    }

    #[test]
    fn hinge_branch_boundaries_use_the_flat_branch() {
        let v = 0.5;
        assert_eq!(prox(Loss::Hinge, Label::Pos, 1.0 - v, v).unwrap(), 1.0);
        assert_eq!(prox(Loss::Hinge, Label::Pos, 1.0, v).unwrap(), 1.0);
        assert_eq!(d_f_out_d_omega(Loss::Hinge, Label::Pos, 1.0, v).unwrap(), -2.0);
    }

    #[test]
    fn teacher_score_is_finite_deep_in_the_tail() {
        let f = f_out_star(Label::Pos, -40.0_f64, 1.0, 0.0).unwrap();
        // Mills ratio asymptote: f ~ |omega| for large negative omega.
        assert!((f - 40.0).abs() < 0.05, "{f}");
        let f = f_out_star(Label::Pos, -40.0_f64, 1.0, 0.3).unwrap();
        assert!(f.abs() < 1e-300);
    }

    #[test]
    fn label_of_zero_is_positive() {
        assert_eq!(Label::of(0.0), Label::Pos);
        assert_eq!(Label::of(-0.0), Label::Pos);
    }
}
