//! Empirical errors at d = 2000 against the asymptotic predictions.

use raf_core::montecarlo::{aggregate_paths, generate_raf_dataset, EmpiricalResult, KernelProblem, McConfig};
use raf_core::state_eqs::{solve_kernel_state_eqs, ErmSpec};
use raf_core::{KernelFamily, Loss};

const D: usize = 2000;
const REPEATS: u64 = 20;
const EPS: f64 = 0.1;
const ALPHA: f64 = 2.0 / 0.9;
const LAMBDA: f64 = 1.0;
const RIDGELESS: f64 = 1e-8;

/// Sample standard error, floored by the binomial resolution of the pooled count.
fn resolution(se: f64, p: f64, trials: f64) -> f64 {
    se.max((p * (1.0 - p) / trials).sqrt())
}

fn check(label: &str, mc: &EmpiricalResult, loss: Loss, family: &KernelFamily, facts: f64) {
    let geom = family.geometry().unwrap();
    let theory = solve_kernel_state_eqs(&ErmSpec::new(loss, geom, LAMBDA, ALPHA, EPS).unwrap()).unwrap().params;
    let (g, m) = (theory.gen_error(), theory.mem_error());
    let tests = (REPEATS as f64) * McConfig::default().n_test as f64;
    let se_g = resolution(mc.stderr_gen, g, tests);
    let se_m = resolution(mc.stderr_mem, m, facts);
    assert!((mc.e_gen_hat - g).abs() <= 3.0 * se_g, "{label} gen {} vs {g} (se {se_g})", mc.e_gen_hat);
    assert!((mc.e_mem_hat - m).abs() <= 3.0 * se_m, "{label} mem {} vs {m} (se {se_m})", mc.e_mem_hat);
    assert!(mc.converged, "{label}");
}

#[test]
fn canonical_settings_match_theory() {
    let config = McConfig::default();
    let n = (ALPHA * D as f64).round() as usize;
    for family in [KernelFamily::Linear, KernelFamily::ErfArcsine, KernelFamily::ReluArccos] {
        let interpolates = family.geometry().unwrap().mu_star > 0.0;
        let ridge_grid: Vec<f64> = if interpolates { vec![LAMBDA, RIDGELESS] } else { vec![LAMBDA] };
        let (mut ridge, mut hinge) = (Vec::new(), Vec::new());
        let mut facts = 0usize;
        for k in 0..REPEATS {
            let data = generate_raf_dataset(n, D, EPS, 1000 + k).unwrap();
            facts += data.fact_index_set.len();
            let problem = KernelProblem::new(&data, &family, &config).unwrap();
            let path = problem.krr_path(&ridge_grid, &config).unwrap();
            if interpolates {
                assert_eq!(path[1].e_mem_hat, 0.0, "{family:?} repeat {k} does not interpolate");
            }
            ridge.push(vec![path[0]]);
            hinge.push(problem.svm_path(&[LAMBDA], &config).unwrap());
        }
        let name = family.name();
        check(&format!("{name} square"), &aggregate_paths(&ridge).unwrap()[0], Loss::Square, &family, facts as f64);
        check(&format!("{name} hinge"), &aggregate_paths(&hinge).unwrap()[0], Loss::Hinge, &family, facts as f64);
    }
}
