use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use raf_core::kernels::{KernelFamily, KernelGeometry};
use raf_core::montecarlo::{aggregate_paths, McConfig, McExperiment};
use raf_core::state_eqs::{
    infinite_lambda_errors, krr_closed_solution, ErmSpec, LambdaChoice, OrderParams, RfSpec, StateEqSolver,
};
use raf_core::Loss;

use crate::config::{GeometrySpec, Grid, LambdaSetting, Quantity, Spacing, SweepConfig};
use crate::output::{write_csv, CsvRow, Source};
use crate::{worker_pool, CliError};

/// 60 log-spaced points on `[1e-5, 1e2]`.
pub fn default_lambda_grid() -> Grid {
    Grid { min: 1e-5, max: 1e2, count: 60, spacing: Spacing::Log }
}

struct Point {
    value: f64,
    geom: KernelGeometry<f64>,
    lambda: LambdaSetting,
    alpha: f64,
    eps: f64,
    kappa: Option<f64>,
}

/// Theory row at one parameter point; solver failures are reported in `status`.
pub fn theory_row(
    sweep_value: f64,
    loss: Loss,
    geom: KernelGeometry<f64>,
    lambda: LambdaSetting,
    alpha: f64,
    eps: f64,
    kappa: Option<f64>,
) -> CsvRow {
    let mut row = CsvRow {
        sweep_value,
        alpha,
        eps,
        mu1: geom.mu1,
        mustar: geom.mu_star,
        lambda: match lambda {
            LambdaSetting::Value(v) => v,
            _ => 0.0,
        },
        loss,
        m: f64::NAN,
        q: f64::NAN,
        v: f64::NAN,
        e_gen: f64::NAN,
        e_mem: f64::NAN,
        source: Source::Theory,
        stderr_gen: None,
        stderr_mem: None,
        status: "ok".into(),
    };
    match solve_point(loss, geom, lambda, alpha, eps, kappa) {
        Ok((params, used_lambda, status)) => {
            row.lambda = used_lambda;
            row.m = params.m;
            row.q = params.q;
            row.v = params.v;
            row.e_gen = params.gen_error();
            row.e_mem = params.mem_error();
            row.status = status;
        }
        Err(e) => row.status = format!("error: {e}"),
    }
    row
}

fn solve_point(
    loss: Loss,
    geom: KernelGeometry<f64>,
    lambda: LambdaSetting,
    alpha: f64,
    eps: f64,
    kappa: Option<f64>,
) -> Result<(OrderParams<f64>, f64, String), CliError> {
    let solver = StateEqSolver::shared();
    let spec = ErmSpec::new(loss, geom, 1.0, alpha, eps)?;
    let flag = |converged: bool, residual: f64| {
        if converged {
            "ok".to_string()
        } else {
            format!("nonconverged (residual {residual:e})")
        }
    };
    if let Some(kappa) = kappa {
        let LambdaSetting::Value(l) = lambda else {
            return Err(CliError::config("lambda", "random features need a numeric regularisation"));
        };
        let sol = raf_core::state_eqs::solve_rf_state_eqs(&RfSpec::new(spec.with_lambda(l), kappa)?)?;
        return Ok((sol.params, l, flag(sol.converged, sol.residual)));
    }
    match lambda {
        LambdaSetting::Value(l) if l > 0.0 => {
            let spec = spec.with_lambda(l);
            if loss == Loss::Square {
                Ok((krr_closed_solution(&spec)?, l, "ok".into()))
            } else {
                let sol = solver.solve_kernel(&spec)?;
                Ok((sol.params, l, flag(sol.converged, sol.residual)))
            }
        }
        LambdaSetting::Value(_) | LambdaSetting::ZeroPlus => {
            let sol = solver.solve_ridgeless(loss, geom, alpha, eps)?;
            Ok((sol.params, 0.0, flag(sol.converged, sol.residual)))
        }
        LambdaSetting::Opt => {
            let opt = solver.lambda_opt(&spec)?;
            let status = if !opt.solution.converged {
                flag(false, opt.solution.residual)
            } else if opt.at_bracket_edge {
                "bracket-edge".to_string()
            } else {
                "ok".to_string()
            };
            let l = match opt.lambda {
                LambdaChoice::Finite(l) => l,
                LambdaChoice::ZeroPlus => 0.0,
            };
            Ok((opt.solution.params, l, status))
        }
    }
}

/// Row for `lambda -> infinity`, where only the errors have a limit.
fn infinite_lambda_row(loss: Loss, geom: KernelGeometry<f64>, alpha: f64, eps: f64) -> CsvRow {
    let mut row = theory_row(f64::INFINITY, loss, geom, LambdaSetting::Value(1.0), alpha, eps, None);
    row.lambda = f64::INFINITY;
    row.m = f64::NAN;
    row.q = f64::NAN;
    row.v = f64::NAN;
    match infinite_lambda_errors(alpha, eps, geom) {
        Ok(e) => {
            row.e_gen = e.gen;
            row.e_mem = e.mem;
            row.status = "ok".into();
        }
        Err(e) => row.status = format!("error: {e}"),
    }
    row
}

/// One row per grid point, in increasing grid order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<CsvRow>, CliError> {
    cfg.validate()?;
    let grid = cfg.grid.points();
    let fixed_geom = match cfg.kernel {
        Some(k) if cfg.quantity != Quantity::Angle => Some(k.geometry()?),
        _ => None,
    };
    let points: Vec<Point> = grid
        .iter()
        .map(|&value| {
            let mut p = Point {
                value,
                geom: fixed_geom.unwrap_or_else(|| KernelGeometry::from_coefficients(1.0, 0.0).expect("valid")),
                lambda: cfg.lambda.unwrap_or(LambdaSetting::Value(value)),
                alpha: cfg.alpha.unwrap_or(value),
                eps: cfg.eps.unwrap_or(value),
                kappa: cfg.kappa,
            };
            match cfg.quantity {
                Quantity::Lambda => p.lambda = LambdaSetting::Value(value),
                Quantity::Angle => p.geom = KernelGeometry::from_angle(value.min(std::f64::consts::FRAC_PI_2))?,
                Quantity::Alpha => p.alpha = value,
                Quantity::Eps => p.eps = value,
                Quantity::Kappa => p.kappa = Some(value),
            }
            Ok(p)
        })
        .collect::<Result<_, CliError>>()?;
    let pool = worker_pool()?;
    let mut rows: Vec<CsvRow> = pool.install(|| {
        points
            .par_iter()
            .map(|p| theory_row(p.value, cfg.loss, p.geom, p.lambda, p.alpha, p.eps, p.kappa))
            .collect()
    });
    if cfg.quantity == Quantity::Lambda && cfg.endpoints && cfg.kappa.is_none() {
        let (geom, alpha, eps) = (fixed_geom.expect("validated"), cfg.alpha.expect("validated"), cfg.eps.expect("validated"));
        if cfg.grid.min > 0.0 {
            rows.insert(0, theory_row(0.0, cfg.loss, geom, LambdaSetting::ZeroPlus, alpha, eps, None));
        }
        rows.push(infinite_lambda_row(cfg.loss, geom, alpha, eps));
    }
    Ok(rows)
}

/// Runs the sweep and writes it to `cfg.output` (or standard output).
/// Nothing is written when the sweep fails.
pub fn write_sweep(cfg: &SweepConfig) -> Result<Vec<CsvRow>, CliError> {
    let rows = run_sweep(cfg)?;
    write_rows(&rows, cfg.output.as_deref())?;
    Ok(rows)
}

/// Writes through a temporary file in the target directory, renamed into place on success.
pub fn write_rows(rows: &[CsvRow], path: Option<&Path>) -> Result<(), CliError> {
    match path {
        None => write_csv(rows, std::io::stdout().lock()),
        Some(path) => {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            write_csv(rows, &mut tmp)?;
            tmp.as_file_mut().sync_all()?;
            tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
            Ok(())
        }
    }
}

/// Gnuplot script drawing the trade-off curve and both errors against the swept value.
pub fn write_gnuplot_stub(csv_path: &Path, script: &Path, log_x: bool) -> Result<(), CliError> {
    let csv = csv_path.display();
    let mut f = std::fs::File::create(script)?;
    writeln!(f, "set datafile separator ','")?;
    writeln!(f, "set key autotitle columnhead")?;
    writeln!(f, "set multiplot layout 1,2")?;
    writeln!(f, "set xlabel 'E_gen'; set ylabel 'E_mem'")?;
    writeln!(f, "plot '{csv}' using 11:12 with linespoints title 'trade-off'")?;
    if log_x {
        writeln!(f, "set logscale x")?;
    }
    writeln!(f, "set xlabel 'sweep value'; set ylabel 'error'")?;
    writeln!(f, "plot '{csv}' using 1:11 with lines title 'E_gen', '' using 1:12 with lines title 'E_mem'")?;
    writeln!(f, "unset multiplot")?;
    Ok(())
}

/// Finite-size experiment along a regularisation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct McRun {
    pub loss: Loss,
    pub kernel: GeometrySpec,
    pub alpha: f64,
    pub eps: f64,
    pub d: usize,
    pub lambdas: Vec<f64>,
    pub repeats: usize,
    pub seed: u64,
    pub config: McConfig,
    /// Also emit the matching theory rows.
    pub with_theory: bool,
}

/// Monte Carlo rows, one per regularisation; repeats run on the worker pool.
pub fn mc_rows(run: &McRun) -> Result<Vec<CsvRow>, CliError> {
    if run.repeats == 0 {
        return Err(CliError::config("repeats", "needs at least one repeat"));
    }
    if run.d == 0 {
        return Err(CliError::config("d", "needs d >= 1"));
    }
    if !(0.0..=1.0).contains(&run.eps) {
        return Err(CliError::config("eps", format!("{} is outside [0, 1]", run.eps)));
    }
    if !(run.alpha > 0.0 && run.alpha.is_finite()) {
        return Err(CliError::config("alpha", "must be positive and finite"));
    }
    if run.lambdas.is_empty() {
        return Err(CliError::config("lambda-grid", "empty grid"));
    }
    let family: KernelFamily = run.kernel.family()?;
    let geom = run.kernel.geometry()?;
    let exp = McExperiment {
        loss: run.loss,
        kernel: family,
        alpha: run.alpha,
        eps: run.eps,
        d: run.d,
        lambdas: run.lambdas.clone(),
        repeats: run.repeats,
        seed: run.seed,
        config: run.config,
    };
    let pool = worker_pool()?;
    let paths = pool.install(|| {
        (0..run.repeats).into_par_iter().map(|k| exp.run_repeat(k)).collect::<Result<Vec<_>, _>>()
    })?;
    let agg = aggregate_paths(&paths)?;
    let mut rows = Vec::new();
    for (&lambda, r) in run.lambdas.iter().zip(&agg) {
        rows.push(CsvRow {
            sweep_value: lambda,
            alpha: run.alpha,
            eps: run.eps,
            mu1: geom.mu1,
            mustar: geom.mu_star,
            lambda,
            loss: run.loss,
            m: f64::NAN,
            q: f64::NAN,
            v: f64::NAN,
            e_gen: r.e_gen_hat,
            e_mem: r.e_mem_hat,
            source: Source::Mc,
            stderr_gen: Some(r.stderr_gen),
            stderr_mem: Some(r.stderr_mem),
            status: if r.converged { "ok".into() } else { "nonconverged".into() },
        });
        if run.with_theory {
            let setting = if lambda > 0.0 { LambdaSetting::Value(lambda) } else { LambdaSetting::ZeroPlus };
            rows.push(theory_row(lambda, run.loss, geom, setting, run.alpha, run.eps, None));
        }
    }
    Ok(rows)
}
