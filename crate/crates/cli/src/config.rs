//! Flat `key = value` run descriptions.
//!
//! Blank lines and lines starting with `#` are ignored. Keys:
//!
//! | key | value |
//! |---|---|
//! | `quantity` | `lambda`, `angle`, `alpha`, `eps` or `kappa` |
//! | `min`, `max`, `count`, `spacing` | grid of the swept quantity; `spacing` is `linear` or `log` |
//! | `loss` | `square` or `hinge` |
//! | `kernel` | family such as `relu` or `gaussian(eta=1.205)`; or give `mu1` and `mustar`, or `gamma` |
//! | `lambda` | a number, `0+` or `opt` |
//! | `alpha`, `eps`, `kappa` | fixed parameters; `kappa` selects random features |
//! | `endpoints` | `true` adds the `0+` and infinite-`lambda` rows to a `lambda` sweep |
//! | `output` | CSV path; standard output when absent |
//!
//! The swept quantity needs no fixed value. Example:
//!
//! ```text
//! quantity = lambda
//! min = 1e-5
//! max = 100
//! count = 60
//! spacing = log
//! loss = square
//! kernel = relu
//! alpha = 2.2222222222222223
//! eps = 0.1
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use raf_core::kernels::{KernelFamily, KernelGeometry};
use raf_core::Loss;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Lambda,
    Angle,
    Alpha,
    Eps,
    Kappa,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::Lambda => "lambda",
            Quantity::Angle => "angle",
            Quantity::Alpha => "alpha",
            Quantity::Eps => "eps",
            Quantity::Kappa => "kappa",
        }
    }
}

impl FromStr for Quantity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "lambda" => Ok(Quantity::Lambda),
            "angle" | "gamma" => Ok(Quantity::Angle),
            "alpha" => Ok(Quantity::Alpha),
            "eps" => Ok(Quantity::Eps),
            "kappa" => Ok(Quantity::Kappa),
            other => Err(format!("unknown quantity {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Grid {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.count < 2 {
            return Err(CliError::config("count", "a grid needs at least 2 points"));
        }
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(CliError::config("min", "grid bounds must be finite"));
        }
        if self.max < self.min {
            return Err(CliError::config("max", "max must not be below min"));
        }
        if self.spacing == Spacing::Log && !(self.min > 0.0) {
            return Err(CliError::config("min", "log spacing needs min > 0"));
        }
        Ok(())
    }

    /// Increasing grid points; the ends are exactly `min` and `max`.
    pub fn points(&self) -> Vec<f64> {
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                if k == 0 {
                    return self.min;
                }
                if k + 1 == self.count {
                    return self.max;
                }
                let t = k as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.min + t * (self.max - self.min),
                    Spacing::Log => (self.min.ln() + t * (self.max.ln() - self.min.ln())).exp(),
                }
            })
            .collect()
    }
}

/// How the kernel is given.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeometrySpec {
    Family(KernelFamily),
    Coefficients { mu1: f64, mu_star: f64 },
    /// `mu1 = sin(gamma)`, `mu_star = cos(gamma)`.
    Angle(f64),
}

impl GeometrySpec {
    pub fn geometry(&self) -> Result<KernelGeometry<f64>, CliError> {
        let g = match *self {
            GeometrySpec::Family(f) => f.geometry(),
            GeometrySpec::Coefficients { mu1, mu_star } => KernelGeometry::from_coefficients(mu1, mu_star),
            GeometrySpec::Angle(gamma) => KernelGeometry::from_angle(gamma),
        };
        g.map_err(|e| CliError::config("kernel", e.to_string()))
    }

    /// A concrete kernel with this geometry, for finite-size runs.
    pub fn family(&self) -> Result<KernelFamily, CliError> {
        Ok(match *self {
            GeometrySpec::Family(f) => f,
            _ => {
                let g = self.geometry()?;
                KernelFamily::TruncatedQuadratic { mu1: g.mu1, mu_star: g.mu_star }
            }
        })
    }
}

/// Regularisation of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaSetting {
    Value(f64),
    ZeroPlus,
    /// Cross-validated on the generalisation error.
    Opt,
}

impl FromStr for LambdaSetting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "0+" => Ok(LambdaSetting::ZeroPlus),
            "opt" => Ok(LambdaSetting::Opt),
            other => {
                let v: f64 = other.parse().map_err(|_| format!("expected a number, 0+ or opt, got {other:?}"))?;
                if v >= 0.0 && v.is_finite() {
                    Ok(LambdaSetting::Value(v))
                } else {
                    Err("regularisation must be finite and >= 0".into())
                }
            }
        }
    }
}

impl fmt::Display for LambdaSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaSetting::Value(v) => write!(f, "{v:?}"),
            LambdaSetting::ZeroPlus => f.write_str("0+"),
            LambdaSetting::Opt => f.write_str("opt"),
        }
    }
}

/// Validated sweep description.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub quantity: Quantity,
    pub grid: Grid,
    pub loss: Loss,
    /// Ignored by angle sweeps.
    pub kernel: Option<GeometrySpec>,
    /// Ignored by lambda sweeps.
    pub lambda: Option<LambdaSetting>,
    pub alpha: Option<f64>,
    pub eps: Option<f64>,
    pub kappa: Option<f64>,
    pub endpoints: bool,
    pub output: Option<PathBuf>,
}

const KEYS: &[&str] = &[
    "quantity", "min", "max", "count", "spacing", "loss", "kernel", "mu1", "mustar", "gamma", "lambda", "alpha",
    "eps", "kappa", "endpoints", "output",
];

impl SweepConfig {
    /// Checks every field against its range, naming the offending key.
    pub fn validate(&self) -> Result<(), CliError> {
        self.grid.validate()?;
        let q = self.quantity;
        let swept = |k: Quantity| q == k;
        if !swept(Quantity::Alpha) {
            let a = self.alpha.ok_or_else(|| CliError::config("alpha", "missing"))?;
            if !(a > 0.0 && a.is_finite()) {
                return Err(CliError::config("alpha", "must be positive and finite"));
            }
        } else if !(self.grid.min > 0.0) {
            return Err(CliError::config("min", "sample ratios must be positive"));
        }
        if !swept(Quantity::Eps) {
            let e = self.eps.ok_or_else(|| CliError::config("eps", "missing"))?;
            if !(0.0..=1.0).contains(&e) {
                return Err(CliError::config("eps", format!("{e} is outside [0, 1]")));
            }
        } else if !(self.grid.min >= 0.0 && self.grid.max <= 1.0) {
            return Err(CliError::config("max", "fact fractions must lie in [0, 1]"));
        }
        if swept(Quantity::Angle) {
            if !(self.grid.min >= 0.0 && self.grid.max <= std::f64::consts::FRAC_PI_2) {
                return Err(CliError::config("max", "angles must lie in [0, pi/2]"));
            }
        } else {
            self.kernel.ok_or_else(|| CliError::config("kernel", "missing"))?.geometry()?;
        }
        if swept(Quantity::Lambda) {
            if !(self.grid.min >= 0.0) {
                return Err(CliError::config("min", "regularisation must be >= 0"));
            }
        } else {
            self.lambda.ok_or_else(|| CliError::config("lambda", "missing"))?;
        }
        let rf = swept(Quantity::Kappa) || self.kappa.is_some();
        if let Some(k) = self.kappa {
            if !(k > 0.0 && k.is_finite()) {
                return Err(CliError::config("kappa", "must be positive and finite"));
            }
        }
        if swept(Quantity::Kappa) && !(self.grid.min > 0.0) {
            return Err(CliError::config("min", "feature ratios must be positive"));
        }
        if rf && !matches!(self.lambda, Some(LambdaSetting::Value(v)) if v > 0.0) && !swept(Quantity::Lambda) {
            return Err(CliError::config("lambda", "random features need a positive numeric regularisation"));
        }
        if rf && swept(Quantity::Lambda) && !(self.grid.min > 0.0) {
            return Err(CliError::config("min", "random features need a positive regularisation"));
        }
        Ok(())
    }

    /// Canonical text form, accepted by [`parse_config`].
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        put("quantity", self.quantity.name().into());
        put("min", format!("{:?}", self.grid.min));
        put("max", format!("{:?}", self.grid.max));
        put("count", self.grid.count.to_string());
        put("spacing", match self.grid.spacing {
            Spacing::Linear => "linear".into(),
            Spacing::Log => "log".into(),
        });
        put("loss", self.loss.to_string());
        match self.kernel {
            Some(GeometrySpec::Family(f)) => put("kernel", f.to_string()),
            Some(GeometrySpec::Coefficients { mu1, mu_star }) => {
                put("mu1", format!("{mu1:?}"));
                put("mustar", format!("{mu_star:?}"));
            }
            Some(GeometrySpec::Angle(g)) => put("gamma", format!("{g:?}")),
            None => {}
        }
        if let Some(l) = self.lambda {
            put("lambda", l.to_string());
        }
        for (k, v) in [("alpha", self.alpha), ("eps", self.eps), ("kappa", self.kappa)] {
            if let Some(v) = v {
                put(k, format!("{v:?}"));
            }
        }
        put("endpoints", self.endpoints.to_string());
        if let Some(p) = &self.output {
            put("output", p.display().to_string());
        }
        out
    }
}

/// Parses and validates a run description.
pub fn parse_config(text: &str) -> Result<SweepConfig, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::config(&format!("line {}", lineno + 1), "expected `key = value`"))?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(CliError::config(k, "unknown key"));
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(CliError::config(k, "given twice"));
        }
    }
    let cfg = from_map(&map)?;
    cfg.validate()?;
    Ok(cfg)
}

fn from_map(map: &BTreeMap<String, String>) -> Result<SweepConfig, CliError> {
    let get = |k: &str| map.get(k).map(String::as_str);
    let need = |k: &str| get(k).ok_or_else(|| CliError::config(k, "missing"));
    let number = |k: &str| -> Result<Option<f64>, CliError> {
        get(k)
            .map(|v| v.parse::<f64>().map_err(|_| CliError::config(k, format!("{v:?} is not a number"))))
            .transpose()
    };
    let quantity: Quantity = need("quantity")?.parse().map_err(|e| CliError::config("quantity", e))?;
    let count = need("count")?;
    let grid = Grid {
        min: number("min")?.ok_or_else(|| CliError::config("min", "missing"))?,
        max: number("max")?.ok_or_else(|| CliError::config("max", "missing"))?,
        count: count.parse().map_err(|_| CliError::config("count", format!("{count:?} is not a count")))?,
        spacing: match get("spacing").unwrap_or("linear") {
            "linear" => Spacing::Linear,
            "log" => Spacing::Log,
            other => return Err(CliError::config("spacing", format!("expected linear or log, got {other:?}"))),
        },
    };
    let loss: Loss = need("loss")?.parse().map_err(|e: raf_core::channel::ChannelError| CliError::config("loss", e.to_string()))?;
    let kernel = match (get("kernel"), number("mu1")?, number("mustar")?, number("gamma")?) {
        (Some(k), None, None, None) => {
            Some(GeometrySpec::Family(k.parse().map_err(|e: raf_core::kernels::KernelError| CliError::config("kernel", e.to_string()))?))
        }
        (None, Some(mu1), Some(mu_star), None) => Some(GeometrySpec::Coefficients { mu1, mu_star }),
        (None, None, None, Some(g)) => Some(GeometrySpec::Angle(g)),
        (None, None, None, None) => None,
        (None, Some(_), None, None) => return Err(CliError::config("mustar", "missing (mu1 given)")),
        (None, None, Some(_), None) => return Err(CliError::config("mu1", "missing (mustar given)")),
        _ => return Err(CliError::config("kernel", "give exactly one of kernel, mu1/mustar or gamma")),
    };
    let lambda = get("lambda")
        .map(|v| v.parse::<LambdaSetting>().map_err(|e| CliError::config("lambda", e)))
        .transpose()?;
    let endpoints = match get("endpoints") {
        None => quantity == Quantity::Lambda,
        Some("true") => true,
        Some("false") => false,
        Some(other) => return Err(CliError::config("endpoints", format!("expected true or false, got {other:?}"))),
    };
    Ok(SweepConfig {
        quantity,
        grid,
        loss,
        kernel,
        lambda,
        alpha: number("alpha")?,
        eps: number("eps")?,
        kappa: number("kappa")?,
        endpoints,
        output: get("output").map(PathBuf::from),
    })
}
