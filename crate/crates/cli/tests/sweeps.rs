use std::f64::consts::FRAC_PI_2;

use raf_cli::{
    mc_rows, parse_config, CsvRow, read_csv, run_sweep, theory_row, write_sweep, GeometrySpec, Grid, LambdaSetting, McRun,
    Quantity, Source, Spacing, SweepConfig,
};
use raf_core::kernels::{Activation, KernelGeometry};
use raf_core::montecarlo::McConfig;
use raf_core::state_eqs::{infinite_lambda_errors, ridgeless_kernel, ridgeless_perceptron_square};
use raf_core::{KernelFamily, Loss};

const ALPHA: f64 = 2.0 / 0.9;
const EPS: f64 = 0.1;

/// Row equality that treats NaN overlaps as equal.
fn same(a: &[CsvRow], b: &[CsvRow]) -> bool {
    format!("{a:?}") == format!("{b:?}")
}

fn lambda_sweep(kernel: KernelFamily, loss: Loss, alpha: f64) -> SweepConfig {
    SweepConfig {
        quantity: Quantity::Lambda,
        grid: Grid { min: 1e-3, max: 10.0, count: 6, spacing: Spacing::Log },
        loss,
        kernel: Some(GeometrySpec::Family(kernel)),
        lambda: None,
        alpha: Some(alpha),
        eps: Some(EPS),
        kappa: None,
        endpoints: true,
        output: None,
    }
}

#[test]
fn lambda_sweep_endpoints_match_the_limits() {
    for loss in [Loss::Square, Loss::Hinge] {
        let rows = run_sweep(&lambda_sweep(KernelFamily::ReluArccos, loss, ALPHA)).unwrap();
        assert_eq!(rows.len(), 8);
        assert!(rows.iter().all(|r| r.is_ok() && r.source == Source::Theory), "{rows:?}");
        let geom = Activation::Relu.geometry().unwrap();
        let zero = ridgeless_kernel(loss, geom, ALPHA, EPS).unwrap().params;
        assert_eq!((rows[0].lambda, rows[0].e_gen, rows[0].e_mem), (0.0, zero.gen_error(), zero.mem_error()));
        let last = rows.last().unwrap();
        let inf = infinite_lambda_errors(ALPHA, EPS, geom).unwrap();
        assert!(last.lambda.is_infinite());
        assert!((last.e_gen - inf.gen).abs() < 1e-12 && (last.e_mem - inf.mem).abs() < 1e-12);
        let lambdas: Vec<f64> = rows.iter().map(|r| r.lambda).collect();
        assert!(lambdas.windows(2).all(|w| w[0] < w[1]));
        // The grid ends approach the limits.
        assert!((rows[1].e_gen - zero.gen_error()).abs() < 0.01);
        assert!((rows[6].e_gen - inf.gen).abs() < 0.02);
    }
}

#[test]
fn perceptron_zero_plus_row_is_least_squares() {
    for alpha in [0.5, ALPHA] {
        let rows = run_sweep(&lambda_sweep(KernelFamily::Linear, Loss::Square, alpha)).unwrap();
        let want = ridgeless_perceptron_square(alpha, EPS).unwrap();
        assert!((rows[0].e_gen - want.gen_error()).abs() < 1e-6);
        assert!((rows[0].e_mem - want.mem_error()).abs() < 1e-6);
    }
}

#[test]
fn angle_sweep_minimum_at_optimal_regularisation() {
    let cfg = SweepConfig {
        quantity: Quantity::Angle,
        grid: Grid { min: 0.0, max: FRAC_PI_2, count: 31, spacing: Spacing::Linear },
        loss: Loss::Square,
        kernel: None,
        lambda: Some(LambdaSetting::Opt),
        alpha: Some(20.0),
        eps: Some(0.2),
        kappa: None,
        endpoints: false,
        output: None,
    };
    let rows = run_sweep(&cfg).unwrap();
    assert_eq!(rows.len(), 31);
    let best = rows.iter().map(|r| r.e_gen).fold(f64::INFINITY, f64::min);
    assert!((best - 0.0858).abs() < 5e-4, "{best}");
    let g = KernelGeometry::from_angle(rows[10].sweep_value).unwrap();
    assert!((rows[10].mu1 - g.mu1).abs() < 1e-15 && (rows[10].mustar - g.mu_star).abs() < 1e-15);
}

#[test]
fn other_quantities_sweep() {
    let text = "quantity = kappa\nmin = 1\nmax = 1000\ncount = 4\nspacing = log\nloss = square\nkernel = erf\n\
                lambda = 0.1\nalpha = 2\neps = 0.1\n";
    let rows = run_sweep(&parse_config(text).unwrap()).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.is_ok()));
    let kernel = theory_row(0.0, Loss::Square, Activation::Erf.geometry().unwrap(), LambdaSetting::Value(0.1), 2.0, 0.1, None);
    assert!((rows[3].e_gen - kernel.e_gen).abs() < 1e-2);

    let text = "quantity = alpha\nmin = 0.5\nmax = 5\ncount = 4\nloss = hinge\ngamma = 1.0\nlambda = 0+\neps = 0.2\n";
    let rows = run_sweep(&parse_config(text).unwrap()).unwrap();
    assert!(rows.windows(2).all(|w| w[1].e_gen < w[0].e_gen));
}

#[test]
fn failed_sweeps_leave_no_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let mut cfg = lambda_sweep(KernelFamily::ReluArccos, Loss::Square, ALPHA);
    cfg.output = Some(path.clone());
    cfg.grid.count = 1;
    assert!(write_sweep(&cfg).is_err());
    assert!(!path.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);

    cfg.grid.count = 4;
    let rows = write_sweep(&cfg).unwrap();
    let back = read_csv(std::fs::File::open(&path).unwrap()).unwrap();
    assert!(same(&back, &rows));
}

#[test]
fn sweeps_are_deterministic() {
    let cfg = lambda_sweep(KernelFamily::ErfArcsine, Loss::Hinge, ALPHA);
    assert!(same(&run_sweep(&cfg).unwrap(), &run_sweep(&cfg).unwrap()));
}

#[test]
fn monte_carlo_rows_with_theory() {
    let run = McRun {
        loss: Loss::Square,
        kernel: GeometrySpec::Family(KernelFamily::ErfArcsine),
        alpha: 2.0,
        eps: 0.2,
        d: 60,
        lambdas: vec![0.1, 1.0],
        repeats: 3,
        seed: 5,
        config: McConfig { n_test: 200, ..McConfig::default() },
        with_theory: true,
    };
    let rows = mc_rows(&run).unwrap();
    assert_eq!(rows.iter().filter(|r| r.source == Source::Mc).count(), 2);
    assert_eq!(rows.iter().filter(|r| r.source == Source::Theory).count(), 2);
    let mc: Vec<_> = rows.iter().filter(|r| r.source == Source::Mc).collect();
    assert!(mc.iter().all(|r| r.stderr_gen.is_some_and(|s| s > 0.0)));
    assert!(same(&rows, &mc_rows(&run).unwrap()));
    assert!(mc_rows(&McRun { repeats: 0, ..run }).is_err());
}
