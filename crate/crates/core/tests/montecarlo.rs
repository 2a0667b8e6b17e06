use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use raf_core::montecarlo::{
    aggregate, cross_gram, empirical_krr, empirical_rf, empirical_rf_with, empirical_svm, generate_raf_dataset,
    gram, EmpiricalResult, KernelMap, KernelProblem, McConfig, McExperiment, Normalization, RafDataset,
};
use raf_core::state_eqs::{hinge_interp_threshold, solve_rf_state_eqs, ErmSpec, RfSpec};
use raf_core::{Activation, KernelFamily, Loss};

fn shipped_kernels() -> Vec<KernelFamily> {
    vec![
        KernelFamily::Linear,
        KernelFamily::SignArcsine,
        KernelFamily::ErfArcsine,
        KernelFamily::ReluArccos,
        KernelFamily::Polynomial { c: 1.0, degree: 3 },
        KernelFamily::Exponential { beta: 1.5 },
        KernelFamily::SphericalGaussian { eta: 1.205 },
        KernelFamily::Geometric { g: 0.5 },
        KernelFamily::TruncatedQuadratic { mu1: 0.8, mu_star: 0.6 },
    ]
}

#[test]
fn dataset_edge_fractions() {
    let none = generate_raf_dataset(200, 10, 0.0, 1).unwrap();
    assert!(none.fact_index_set.is_empty());
    assert_eq!(none.rule_index_set.len(), 200);
    let all = generate_raf_dataset(200, 10, 1.0, 1).unwrap();
    assert!(all.rule_index_set.is_empty());
    assert!(generate_raf_dataset(0, 10, 0.1, 1).is_err());
    assert!(generate_raf_dataset(10, 0, 0.1, 1).is_err());
    assert!(generate_raf_dataset(10, 3, 1.5, 1).is_err());
}

#[test]
fn fact_fraction_concentrates() {
    let n = 10_000;
    let data = generate_raf_dataset(n, 5, 0.2, 42).unwrap();
    let frac = data.fact_index_set.len() as f64 / n as f64;
    assert!((frac - 0.2).abs() <= 3.0 * (0.2_f64 * 0.8 / n as f64).sqrt(), "{frac}");
}

#[test]
fn fact_labels_look_rademacher() {
    let data = generate_raf_dataset(20_000, 4, 1.0, 3).unwrap();
    let mean = data.labels.iter().sum::<f64>() / 20_000.0;
    assert!(mean.abs() < 3.0 / (20_000.0_f64).sqrt(), "{mean}");
    // Independent of the rule: about half agree with the teacher.
    let fields = &data.inputs * &data.teacher;
    let agree = fields.iter().zip(&data.labels).filter(|(f, y)| f.signum() == **y).count();
    let frac = agree as f64 / 20_000.0;
    assert!((frac - 0.5).abs() < 3.0 * 0.5 / (20_000.0_f64).sqrt(), "{frac}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dataset_invariants(n in 1usize..300, d in 1usize..20, eps in 0.0f64..=1.0, seed in any::<u64>()) {
        let data = generate_raf_dataset(n, d, eps, seed).unwrap();
        prop_assert_eq!(data.inputs.shape(), (n, d));
        prop_assert_eq!(data.teacher.len(), d);
        let mut all: Vec<usize> = data.fact_index_set.iter().chain(&data.rule_index_set).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        for &i in &data.rule_index_set {
            let z = data.inputs.row(i).dot(&data.teacher.transpose());
            prop_assert_eq!(data.labels[i], if z >= 0.0 { 1.0 } else { -1.0 });
        }
        prop_assert!(data.labels.iter().all(|&y| y == 1.0 || y == -1.0));
        prop_assert_eq!(&generate_raf_dataset(n, d, eps, seed).unwrap(), &data);
    }

    #[test]
    fn aggregate_of_identical_draws(g in 0.0f64..=1.0, m in 0.0f64..=1.0, k in 2usize..30) {
        let r = EmpiricalResult { e_gen_hat: g, e_mem_hat: m, stderr_gen: f64::NAN, stderr_mem: f64::NAN, n_repeats: 1, converged: true };
        let out = aggregate(&vec![r; k]).unwrap();
        prop_assert!((out.e_gen_hat - g).abs() < 1e-15 && (out.e_mem_hat - m).abs() < 1e-15);
        prop_assert!(out.stderr_gen.abs() < 1e-15 && out.stderr_mem.abs() < 1e-15);
        prop_assert_eq!(out.n_repeats, k);
    }
}

#[test]
fn gram_matrices_are_symmetric_psd() {
    let data = generate_raf_dataset(80, 40, 0.3, 9).unwrap();
    for family in shipped_kernels() {
        for centered in [false, true] {
            for norm in [Normalization::of(&family), Normalization::Cosine] {
                let map = KernelMap { family, norm, centered };
                let g = gram(&map, &data.inputs);
                assert_eq!(g, g.transpose(), "{family:?}");
                let scale = g.norm();
                let min = g.clone().symmetric_eigen().eigenvalues.min();
                assert!(min >= -1e-8 * scale, "{family:?} {norm:?} centered={centered}: {min}");
                let cross = cross_gram(&map, &data.inputs, &data.inputs);
                assert!((&cross - &g).amax() <= 1e-12 * scale);
            }
        }
    }
}

#[test]
fn single_point_is_fit_exactly() {
    let data = generate_raf_dataset(1, 20, 1.0, 4).unwrap();
    assert_eq!(data.fact_index_set, vec![0]);
    let out = empirical_krr(&data, &KernelFamily::ReluArccos, 0.0).unwrap();
    assert_eq!(out.e_mem_hat, 0.0);
    assert!(out.converged);
}

#[test]
fn separable_pair_has_no_hinge_violations() {
    let data = RafDataset {
        inputs: DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]),
        labels: vec![1.0, -1.0],
        fact_index_set: vec![0, 1],
        rule_index_set: vec![],
        teacher: DVector::from_column_slice(&[1.0, 1.0]),
        seed: 0,
    };
    let config = McConfig { n_test: 10, ..McConfig::default() };
    let problem = KernelProblem::new(&data, &KernelFamily::Linear, &config).unwrap();
    let fit = problem.fit_svm(1e-3, &config).unwrap();
    assert!(fit.converged);
    for i in 0..2 {
        assert!(data.labels[i] * fit.train_fields[i] >= 1.0 - 1e-9, "{}", fit.train_fields[i]);
    }
    assert_eq!(problem.evaluate(&fit).e_mem_hat, 0.0);
}

#[test]
fn invalid_regularisation_is_rejected() {
    let data = generate_raf_dataset(20, 5, 0.1, 1).unwrap();
    assert!(empirical_krr(&data, &KernelFamily::Linear, -1.0).is_err());
    assert!(empirical_svm(&data, &KernelFamily::Linear, 0.0).is_err());
    assert!(empirical_rf(&data, 0, Activation::Relu, Loss::Square, 1.0, 1).is_err());
    assert!(empirical_rf(&data, 4, Activation::Relu, Loss::Hinge, 0.0, 1).is_err());
}

#[test]
fn perceptron_svm_memorises_below_threshold() {
    let eps = 0.2;
    let alpha = 0.5 * hinge_interp_threshold(eps).unwrap();
    let d = 200;
    let data = generate_raf_dataset((alpha * d as f64).round() as usize, d, eps, 11).unwrap();
    let out = empirical_svm(&data, &KernelFamily::Linear, 1e-6).unwrap();
    assert!(out.converged);
    assert_eq!(out.e_mem_hat, 0.0);
}

#[test]
fn identity_features_reproduce_least_squares() {
    let (d, n) = (50, 100);
    let data = generate_raf_dataset(n, d, 0.2, 5).unwrap();
    let rf = empirical_rf(&data, 2 * d, Activation::Linear, Loss::Square, 0.0, 17).unwrap();
    let direct = empirical_krr(&data, &KernelFamily::Linear, 0.0).unwrap();
    assert_eq!(rf.e_gen_hat, direct.e_gen_hat);
    assert_eq!(rf.e_mem_hat, direct.e_mem_hat);
}

#[test]
fn random_features_memorise_only_when_wide() {
    let eps = 0.1;
    let alpha = 2.0 / (1.0 - eps);
    let d = 100;
    let data = generate_raf_dataset((alpha * d as f64).round() as usize, d, eps, 21).unwrap();
    let narrow = empirical_rf(&data, d / 2, Activation::Relu, Loss::Square, 0.0, 1).unwrap();
    let wide = empirical_rf(&data, 8 * d, Activation::Relu, Loss::Square, 0.0, 1).unwrap();
    assert!(narrow.e_mem_hat > 0.0);
    assert_eq!(wide.e_mem_hat, 0.0);
}

#[test]
fn random_features_agree_with_finite_width_theory() {
    let (eps, alpha, lambda, kappa) = (0.1, 2.0 / 0.9, 0.1, 2.0);
    let d = 300;
    let config = McConfig::default();
    let runs: Vec<_> = (0..20)
        .map(|k| {
            let data = generate_raf_dataset((alpha * d as f64).round() as usize, d, eps, 500 + k).unwrap();
            let p = (kappa * d as f64) as usize;
            empirical_rf_with(&data, p, Activation::Relu, Loss::Square, lambda, 900 + k, &config).unwrap()
        })
        .collect();
    let mc = aggregate(&runs).unwrap();
    let geom = Activation::Relu.geometry().unwrap();
    let spec = RfSpec::new(ErmSpec::new(Loss::Square, geom, lambda, alpha, eps).unwrap(), kappa).unwrap();
    let theory = solve_rf_state_eqs(&spec).unwrap().params;
    assert!((mc.e_gen_hat - theory.gen_error()).abs() <= 3.0 * mc.stderr_gen, "{mc:?} {theory:?}");
    assert!((mc.e_mem_hat - theory.mem_error()).abs() <= 3.0 * mc.stderr_mem, "{mc:?} {theory:?}");
}

#[test]
fn experiments_are_seed_deterministic() {
    let exp = McExperiment {
        loss: Loss::Hinge,
        kernel: KernelFamily::ErfArcsine,
        alpha: 1.5,
        eps: 0.2,
        d: 60,
        lambdas: vec![0.01, 1.0],
        repeats: 3,
        seed: 77,
        config: McConfig { n_test: 300, ..McConfig::default() },
    };
    let a = exp.run().unwrap();
    let b = exp.run().unwrap();
    assert_eq!(a.iter().map(bits).collect::<Vec<_>>(), b.iter().map(bits).collect::<Vec<_>>());
    let other = McExperiment { seed: 78, ..exp.clone() }.run().unwrap();
    assert_ne!(a, other);
    let rf = |s| {
        let data = generate_raf_dataset(90, 60, 0.2, 5).unwrap();
        empirical_rf(&data, 120, Activation::Erf, Loss::Hinge, 0.1, s).unwrap()
    };
    assert_eq!(bits(&rf(3)), bits(&rf(3)));
}

fn bits(r: &EmpiricalResult) -> [u64; 4] {
    [r.e_gen_hat, r.e_mem_hat, r.stderr_gen, r.stderr_mem].map(f64::to_bits)
}
