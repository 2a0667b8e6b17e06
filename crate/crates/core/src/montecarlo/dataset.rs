use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::McError;

/// Stream of the training inputs, labels and teacher.
const TRAIN_STREAM: u64 = 0;
/// Stream of the held-out test inputs.
const TEST_STREAM: u64 = 1;

/// Gaussian training set labelled by a linear rule, with a random subset of facts.
#[derive(Debug, Clone, PartialEq)]
pub struct RafDataset {
    /// One sample per row.
    pub inputs: DMatrix<f64>,
    pub labels: Vec<f64>,
    pub fact_index_set: Vec<usize>,
    pub rule_index_set: Vec<usize>,
    pub teacher: DVector<f64>,
    pub seed: u64,
}

/// Fresh inputs labelled by the rule alone.
#[derive(Debug, Clone, PartialEq)]
pub struct TestSet {
    pub inputs: DMatrix<f64>,
    pub labels: Vec<f64>,
}

pub fn generate_raf_dataset(n: usize, d: usize, eps: f64, seed: u64) -> Result<RafDataset, McError> {
    if n == 0 || d == 0 {
        return Err(McError::InvalidArgument("needs n >= 1 and d >= 1".into()));
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(McError::InvalidArgument("fact fraction must lie in [0, 1]".into()));
    }
    let mut rng = stream(seed, TRAIN_STREAM);
    let teacher = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let inputs = gaussian_rows(&mut rng, n, d);
    let rule = rule_labels(&inputs, &teacher);
    let mut labels = Vec::with_capacity(n);
    let (mut facts, mut rules) = (Vec::new(), Vec::new());
    for (i, &y) in rule.iter().enumerate() {
        if rng.gen::<f64>() < eps {
            facts.push(i);
            labels.push(if rng.gen::<bool>() { 1.0 } else { -1.0 });
        } else {
            rules.push(i);
            labels.push(y);
        }
    }
    Ok(RafDataset { inputs, labels, fact_index_set: facts, rule_index_set: rules, teacher, seed })
}

impl RafDataset {
    pub fn n(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn d(&self) -> usize {
        self.inputs.ncols()
    }

    /// `n_test` rule-labelled points, drawn from a stream independent of the training set.
    pub fn test_set(&self, n_test: usize) -> TestSet {
        let mut rng = stream(self.seed, TEST_STREAM);
        let inputs = gaussian_rows(&mut rng, n_test, self.d());
        let labels = rule_labels(&inputs, &self.teacher);
        TestSet { inputs, labels }
    }
}

pub(crate) fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Row-by-row draw, so the sample order does not depend on the storage layout.
pub(crate) fn gaussian_rows(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    DMatrix::from_row_slice(rows, cols, &data)
}

/// `sign(teacher . x / sqrt(d))` with `sign(0) = +1`.
fn rule_labels(inputs: &DMatrix<f64>, teacher: &DVector<f64>) -> Vec<f64> {
    let fields = inputs * teacher;
    fields.iter().map(|&z| sign(z)).collect()
}

pub(crate) fn sign(z: f64) -> f64 {
    if z >= 0.0 {
        1.0
    } else {
        -1.0
    }
}
