use nalgebra::{DMatrix, DVector};

use crate::channel::Loss;
use crate::kernels::{Activation, KernelFamily};

use super::dataset::{gaussian_rows, generate_raf_dataset, sign, stream, RafDataset};
use super::gram::{cross_gram, gram, KernelMap, Normalization};
use super::solvers::{hinge_dual, min_norm_least_squares, multi_shift_cg, FeatureDual, GramDual};
use super::{aggregate_paths, EmpiricalResult, McError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub n_test: usize,
    /// Overrides the per-family convention.
    pub normalization: Option<Normalization>,
    /// Remove the constant kernel component, or the mean of the random features.
    pub centered: bool,
    /// Relative residual of the ridge systems.
    pub cg_tol: f64,
    /// Duality gap of the hinge fits, relative to `max(1, primal)`.
    pub svm_gap_tol: f64,
    pub max_epochs: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { n_test: 2000, normalization: None, centered: true, cg_tol: 1e-10, svm_gap_tol: 1e-6, max_epochs: 20_000 }
    }
}

/// Gram matrices of one dataset, shared by every fit along a path.
#[derive(Debug, Clone)]
pub struct KernelProblem {
    pub gram: DMatrix<f64>,
    /// Test points by training points.
    pub test_gram: DMatrix<f64>,
    pub labels: DVector<f64>,
    pub test_labels: Vec<f64>,
    pub facts: Vec<usize>,
}

impl KernelProblem {
    pub fn new(data: &RafDataset, family: &KernelFamily, config: &McConfig) -> Result<Self, McError> {
        family.validate()?;
        let mut map = KernelMap::new(*family);
        map.centered = config.centered;
        if let Some(norm) = config.normalization {
            map.norm = norm;
        }
        let test = data.test_set(config.n_test);
        Ok(Self {
            gram: gram(&map, &data.inputs),
            test_gram: cross_gram(&map, &test.inputs, &data.inputs),
            labels: DVector::from_column_slice(&data.labels),
            test_labels: test.labels,
            facts: data.fact_index_set.clone(),
        })
    }

    /// Errors of a fitted predictor.
    pub fn evaluate(&self, fit: &Fit) -> EmpiricalResult {
        let test_fields = &self.test_gram * &fit.coeffs;
        score(&fit.train_fields, &self.labels, &self.facts, &test_fields, &self.test_labels, fit.converged)
    }

    /// Hinge fit at a single `lambda > 0`.
    pub fn fit_svm(&self, lambda: f64, config: &McConfig) -> Result<Fit, McError> {
        check_lambdas(&[lambda], false)?;
        let n = self.labels.len();
        let y: Vec<f64> = self.labels.iter().copied().collect();
        let mut dual = GramDual { g: &self.gram, u: DVector::zeros(n) };
        let mut a = vec![0.0; n];
        let outcome = hinge_dual(&mut dual, &y, &mut a, lambda, config.svm_gap_tol, config.max_epochs);
        Ok(hinge_fit(&dual, &a, &y, lambda, outcome.converged))
    }

    /// Ridge fits `(G + lambda I) c = y` for every `lambda >= 0`, in the order given.
    pub fn krr_path(&self, lambdas: &[f64], config: &McConfig) -> Result<Vec<EmpiricalResult>, McError> {
        check_lambdas(lambdas, true)?;
        let n = self.labels.len();
        let positive: Vec<f64> = lambdas.iter().copied().filter(|&l| l > 0.0).collect();
        let shifted = multi_shift_cg(&self.gram, &self.labels, &positive, config.cg_tol, 10 * n + 100);
        let mut solutions = shifted.solutions.into_iter();
        let mut out = Vec::with_capacity(lambdas.len());
        for &lambda in lambdas {
            let (c, ok) = if lambda > 0.0 {
                (solutions.next().expect("one solution per positive shift"), shifted.converged)
            } else {
                let (c, _, ok) = min_norm_least_squares(&self.gram, &self.labels, config.cg_tol, 10 * n + 100);
                (c, ok)
            };
            let train_fields = &self.gram * &c;
            out.push(self.evaluate(&Fit { coeffs: c, train_fields, converged: ok }));
        }
        Ok(out)
    }

    /// Hinge fits for every `lambda > 0`, warm-started from the largest
    /// regularisation down and reported in the order given.
    pub fn svm_path(&self, lambdas: &[f64], config: &McConfig) -> Result<Vec<EmpiricalResult>, McError> {
        check_lambdas(lambdas, false)?;
        let n = self.labels.len();
        let y: Vec<f64> = self.labels.iter().copied().collect();
        let mut order: Vec<usize> = (0..lambdas.len()).collect();
        order.sort_by(|&i, &j| lambdas[j].total_cmp(&lambdas[i]));
        let mut dual = GramDual { g: &self.gram, u: DVector::zeros(n) };
        let mut a = vec![0.0; n];
        let mut out = vec![None; lambdas.len()];
        for k in order {
            let lambda = lambdas[k];
            let fit = hinge_dual(&mut dual, &y, &mut a, lambda, config.svm_gap_tol, config.max_epochs);
            out[k] = Some(self.evaluate(&hinge_fit(&dual, &a, &y, lambda, fit.converged)));
        }
        Ok(out.into_iter().map(|r| r.expect("every lambda visited")).collect())
    }
}

/// Expansion coefficients `c` of `f = sum_j c_j K(., x_j)` and the fitted values on the training set.
#[derive(Debug, Clone, PartialEq)]
pub struct Fit {
    pub coeffs: DVector<f64>,
    pub train_fields: DVector<f64>,
    pub converged: bool,
}

fn hinge_fit(dual: &GramDual<'_>, a: &[f64], y: &[f64], lambda: f64, converged: bool) -> Fit {
    let coeffs = DVector::from_fn(a.len(), |i, _| a[i] * y[i] / lambda);
    Fit { coeffs, train_fields: &dual.u / lambda, converged }
}

fn check_lambdas(lambdas: &[f64], allow_zero: bool) -> Result<(), McError> {
    let ok = |l: f64| l.is_finite() && (l > 0.0 || (allow_zero && l == 0.0));
    if lambdas.iter().all(|&l| ok(l)) {
        Ok(())
    } else if allow_zero {
        Err(McError::InvalidArgument("regularisation must be finite and >= 0".into()))
    } else {
        Err(McError::InvalidArgument("regularisation must be finite and > 0".into()))
    }
}

fn score(
    train_fields: &DVector<f64>,
    labels: &DVector<f64>,
    facts: &[usize],
    test_fields: &DVector<f64>,
    test_labels: &[f64],
    converged: bool,
) -> EmpiricalResult {
    let wrong_facts = facts.iter().filter(|&&i| sign(train_fields[i]) != labels[i]).count();
    let mem = if facts.is_empty() { 0.0 } else { wrong_facts as f64 / facts.len() as f64 };
    let wrong_test = test_fields.iter().zip(test_labels).filter(|(&f, &y)| sign(f) != y).count();
    let gen = if test_labels.is_empty() { 0.0 } else { wrong_test as f64 / test_labels.len() as f64 };
    EmpiricalResult::single(gen, mem, converged)
}

/// Kernel ridge regression at one regularisation, with default settings.
pub fn empirical_krr(data: &RafDataset, kernel: &KernelFamily, lambda: f64) -> Result<EmpiricalResult, McError> {
    let config = McConfig::default();
    let problem = KernelProblem::new(data, kernel, &config)?;
    Ok(problem.krr_path(&[lambda], &config)?[0])
}

/// Kernel hinge classifier at one regularisation, with default settings.
pub fn empirical_svm(data: &RafDataset, kernel: &KernelFamily, lambda: f64) -> Result<EmpiricalResult, McError> {
    let config = McConfig::default();
    let problem = KernelProblem::new(data, kernel, &config)?;
    Ok(problem.svm_path(&[lambda], &config)?[0])
}

/// Linear model on `width_p` random features `s(F^T x / sqrt(d)) / sqrt(p)`.
pub fn empirical_rf(
    data: &RafDataset,
    width_p: usize,
    activation: Activation,
    loss: Loss,
    lambda: f64,
    seed_features: u64,
) -> Result<EmpiricalResult, McError> {
    empirical_rf_with(data, width_p, activation, loss, lambda, seed_features, &McConfig::default())
}

pub fn empirical_rf_with(
    data: &RafDataset,
    width_p: usize,
    activation: Activation,
    loss: Loss,
    lambda: f64,
    seed_features: u64,
    config: &McConfig,
) -> Result<EmpiricalResult, McError> {
    if width_p == 0 {
        return Err(McError::InvalidArgument("needs at least one feature".into()));
    }
    check_lambdas(&[lambda], loss == Loss::Square)?;
    let d = data.d();
    let projection = gaussian_rows(&mut stream(seed_features, 0), d, width_p);
    let mean = if config.centered { activation_mean(activation) } else { 0.0 };
    let features = |x: &DMatrix<f64>| {
        let mut z = x * &projection;
        let (pre, post) = (1.0 / (d as f64).sqrt(), 1.0 / (width_p as f64).sqrt());
        z.apply(|v| *v = (activation.apply(*v * pre) - mean) * post);
        z
    };
    let z = features(&data.inputs);
    let test = data.test_set(config.n_test);
    let z_test = features(&test.inputs);
    let y = DVector::from_column_slice(&data.labels);
    let (w, converged) = match loss {
        Loss::Square => (ridge_weights(&z, &y, lambda)?, true),
        Loss::Hinge => {
            let zt = z.transpose();
            let mut dual = FeatureDual::new(&zt);
            let mut a = vec![0.0; y.len()];
            let fit = hinge_dual(&mut dual, y.as_slice(), &mut a, lambda, config.svm_gap_tol, config.max_epochs);
            (dual.w / lambda, fit.converged)
        }
    };
    let fields = &z * &w;
    let test_fields = &z_test * &w;
    Ok(score(&fields, &y, &data.fact_index_set, &test_fields, &test.labels, converged))
}

/// `E[s(g)]` for a standard Gaussian `g`.
fn activation_mean(activation: Activation) -> f64 {
    match activation {
        Activation::Relu => 1.0 / (2.0 * std::f64::consts::PI).sqrt(),
        Activation::Linear | Activation::Sign | Activation::Erf | Activation::Tanh => 0.0,
    }
}

/// Ridge weights on explicit features, through whichever normal equations are smaller.
fn ridge_weights(z: &DMatrix<f64>, y: &DVector<f64>, lambda: f64) -> Result<DVector<f64>, McError> {
    let (n, p) = z.shape();
    if lambda == 0.0 {
        let svd = z.clone().svd(true, true);
        let cutoff = svd.singular_values.max() * 1e-12 * n.max(p) as f64;
        return svd.solve(y, cutoff).map_err(|e| McError::Linalg(e.into()));
    }
    let singular = || McError::Linalg("regularised normal equations are not positive definite".into());
    if p <= n {
        let mut m = z.tr_mul(z);
        for i in 0..p {
            m[(i, i)] += lambda;
        }
        Ok(m.cholesky().ok_or_else(singular)?.solve(&z.tr_mul(y)))
    } else {
        let mut m = z * z.transpose();
        for i in 0..n {
            m[(i, i)] += lambda;
        }
        let c = m.cholesky().ok_or_else(singular)?.solve(y);
        Ok(z.tr_mul(&c))
    }
}

/// Repeated kernel fits on fresh datasets of size `round(alpha d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct McExperiment {
    pub loss: Loss,
    pub kernel: KernelFamily,
    pub alpha: f64,
    pub eps: f64,
    pub d: usize,
    pub lambdas: Vec<f64>,
    pub repeats: usize,
    pub seed: u64,
    pub config: McConfig,
}

impl McExperiment {
    pub fn n(&self) -> usize {
        ((self.alpha * self.d as f64).round() as usize).max(1)
    }

    /// Dataset seed of repeat `k`.
    pub fn repeat_seed(&self, k: usize) -> u64 {
        splitmix(self.seed ^ splitmix(k as u64))
    }

    /// Errors along the regularisation path for one draw.
    pub fn run_repeat(&self, k: usize) -> Result<Vec<EmpiricalResult>, McError> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(McError::InvalidArgument("sample ratio must be positive".into()));
        }
        let data = generate_raf_dataset(self.n(), self.d, self.eps, self.repeat_seed(k))?;
        let problem = KernelProblem::new(&data, &self.kernel, &self.config)?;
        match self.loss {
            Loss::Square => problem.krr_path(&self.lambdas, &self.config),
            Loss::Hinge => problem.svm_path(&self.lambdas, &self.config),
        }
    }

    /// Mean and standard error at each regularisation, over all repeats.
    pub fn run(&self) -> Result<Vec<EmpiricalResult>, McError> {
        if self.repeats == 0 {
            return Err(McError::InvalidArgument("needs at least one repeat".into()));
        }
        let paths = (0..self.repeats).map(|k| self.run_repeat(k)).collect::<Result<Vec<_>, _>>()?;
        aggregate_paths(&paths)
    }
}

fn splitmix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
