use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::kernels::KernelFamily;

/// How pairs of inputs are turned into a kernel argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// `rho = x . x' / (|x| |x'|)`, for families defined on the sphere.
    Cosine,
    /// Gaussian-feature expectations with covariances `x . x' / d`, for
    /// kernels induced by an activation.
    GaussianFeature,
}

impl Normalization {
    /// Convention of `family`.
    pub fn of(family: &KernelFamily) -> Self {
        match family {
            KernelFamily::Linear
            | KernelFamily::SignArcsine
            | KernelFamily::ErfArcsine
            | KernelFamily::ReluArccos => Normalization::GaussianFeature,
            _ => Normalization::Cosine,
        }
    }
}

/// How a kernel family is evaluated on finite samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelMap {
    pub family: KernelFamily,
    pub norm: Normalization,
    /// Drop the constant component `mu0^2`, which the asymptotic equations do not see.
    pub centered: bool,
}

impl KernelMap {
    pub fn new(family: KernelFamily) -> Self {
        Self { family, norm: Normalization::of(&family), centered: true }
    }

    fn entry(&self, s11: f64, s22: f64, s12: f64) -> f64 {
        let k = entry(&self.family, self.norm, s11, s22, s12);
        if self.centered {
            k - constant_part(&self.family, self.norm, s11, s22)
        } else {
            k
        }
    }
}

/// Kernel between rows of `a` and rows of `b`.
pub fn cross_gram(map: &KernelMap, a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let d = a.ncols() as f64;
    let mut s = a * b.transpose();
    s /= d;
    let na = row_norms_sq(a, d);
    let nb = row_norms_sq(b, d);
    for j in 0..s.ncols() {
        for i in 0..s.nrows() {
            s[(i, j)] = map.entry(na[i], nb[j], s[(i, j)]);
        }
    }
    s
}

/// Symmetric kernel matrix of the rows of `a`.
pub fn gram(map: &KernelMap, a: &DMatrix<f64>) -> DMatrix<f64> {
    let d = a.ncols() as f64;
    let mut s = a * a.transpose();
    s /= d;
    let na = row_norms_sq(a, d);
    let n = s.nrows();
    for j in 0..n {
        for i in 0..=j {
            let k = map.entry(na[i], na[j], s[(i, j)]);
            s[(i, j)] = k;
            s[(j, i)] = k;
        }
    }
    s
}

fn row_norms_sq(a: &DMatrix<f64>, d: f64) -> Vec<f64> {
    a.row_iter().map(|r| r.norm_squared() / d).collect()
}

fn entry(family: &KernelFamily, norm: Normalization, s11: f64, s22: f64, s12: f64) -> f64 {
    let scale = (s11 * s22).sqrt();
    let cosine = if scale > 0.0 { s12 / scale } else { 0.0 };
    match norm {
        Normalization::Cosine => family.eval(cosine),
        Normalization::GaussianFeature => gaussian_feature(family, s11, s22, s12, cosine),
    }
}

fn constant_part(family: &KernelFamily, norm: Normalization, s11: f64, s22: f64) -> f64 {
    match (norm, family) {
        (Normalization::GaussianFeature, KernelFamily::ReluArccos) => (s11 * s22).sqrt() / (2.0 * PI),
        (Normalization::GaussianFeature, KernelFamily::Linear)
        | (Normalization::GaussianFeature, KernelFamily::SignArcsine)
        | (Normalization::GaussianFeature, KernelFamily::ErfArcsine) => 0.0,
        _ => family.eval(0.0),
    }
}

/// `E[s(u) s(u')]` for centred Gaussians with the given covariance.
fn gaussian_feature(family: &KernelFamily, s11: f64, s22: f64, s12: f64, cosine: f64) -> f64 {
    match *family {
        KernelFamily::Linear => s12,
        KernelFamily::SignArcsine => family.eval(cosine),
        KernelFamily::ErfArcsine => {
            let r = 2.0 * s12 / ((1.0 + 2.0 * s11) * (1.0 + 2.0 * s22)).sqrt();
            2.0 / PI * r.clamp(-1.0, 1.0).asin()
        }
        KernelFamily::ReluArccos => (s11 * s22).sqrt() * family.eval(cosine),
        _ => family.eval(s12),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_covariance_matches_family() {
        for fam in [KernelFamily::ErfArcsine, KernelFamily::ReluArccos, KernelFamily::SignArcsine] {
            for rho in [-0.7, 0.0, 0.3, 1.0] {
                let k = gaussian_feature(&fam, 1.0, 1.0, rho, rho);
                assert!((k - fam.eval(rho)).abs() < 1e-14, "{fam:?} {rho}");
            }
        }
    }
}
