use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use raf_cli::{
    cross_validate_lambda, default_lambda_grid, fit_coefficient, fit_rate, mc_rows, parse_config, rate_curve, theory_row,
    write_gnuplot_stub, write_sweep, CliError, CsvRow, GeometrySpec, Grid, LambdaSetting, McRun, Quantity,
    RateModel, Spacing, SweepConfig,
};
use raf_core::bayes::{bo_rate_constant, solve_bo};
use raf_core::kernels::{Activation, KernelFamily};
use raf_core::montecarlo::McConfig;
use raf_core::state_eqs::{hinge_interp_threshold, hinge_threshold_asymptote, krr_large_alpha_coeff, ErmSpec, LambdaChoice};
use raf_core::Loss;

/// Asymptotic and finite-size errors of kernel methods on rules-and-facts data.
/// Set RAF_THREADS to bound the worker pool.
#[derive(Parser)]
#[command(name = "raf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct KernelArgs {
    /// Kernel family, e.g. `relu`, `erf`, `linear`, `gaussian(eta=1.205)`.
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long)]
    mu1: Option<f64>,
    #[arg(long)]
    mustar: Option<f64>,
    /// Angle with `mu1 = sin(gamma)`, `mu_star = cos(gamma)`.
    #[arg(long)]
    gamma: Option<f64>,
}

impl KernelArgs {
    fn spec(&self) -> Result<GeometrySpec, CliError> {
        match (&self.kernel, self.mu1, self.mustar, self.gamma) {
            (Some(k), None, None, None) => Ok(GeometrySpec::Family(
                k.parse::<KernelFamily>().map_err(|e| CliError::config("kernel", e.to_string()))?,
            )),
            (None, Some(mu1), Some(mu_star), None) => Ok(GeometrySpec::Coefficients { mu1, mu_star }),
            (None, None, None, Some(g)) => Ok(GeometrySpec::Angle(g)),
            _ => Err(CliError::config("kernel", "give exactly one of --kernel, --mu1/--mustar or --gamma")),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Bayes-optimal overlap and generalisation error.
    Bo {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        eps: f64,
    },
    /// Large-alpha decay of the Bayes-optimal error: fitted and predicted.
    BoRate {
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 10.0)]
        alpha_min: f64,
        #[arg(long, default_value_t = 1e4)]
        alpha_max: f64,
        #[arg(long, default_value_t = 25)]
        count: usize,
    },
    /// Order parameters and errors at one point.
    StateEq {
        #[arg(long)]
        loss: Loss,
        #[command(flatten)]
        kernel: KernelArgs,
        /// A number, `0+` or `opt`.
        #[arg(long)]
        lambda: String,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        eps: f64,
        /// Features per input dimension; selects the random-feature equations.
        #[arg(long)]
        kappa: Option<f64>,
    },
    /// Errors along a regularisation grid, with the `0+` and infinite endpoints.
    SweepLambda {
        #[arg(long)]
        loss: Loss,
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long, default_value_t = default_lambda_grid().min)]
        min: f64,
        #[arg(long, default_value_t = default_lambda_grid().max)]
        max: f64,
        #[arg(long, default_value_t = default_lambda_grid().count)]
        count: usize,
        #[arg(long)]
        no_endpoints: bool,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write a gnuplot script for the output file.
        #[arg(long, requires = "output")]
        gnuplot: Option<PathBuf>,
    },
    /// Errors along the kernel angle in `[0, pi/2]`.
    SweepAngle {
        #[arg(long)]
        loss: Loss,
        /// A number, `0+` or `opt`.
        #[arg(long, default_value = "opt")]
        lambda: String,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 31)]
        count: usize,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, requires = "output")]
        gnuplot: Option<PathBuf>,
    },
    /// Any sweep described by a key-value config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        gnuplot: Option<PathBuf>,
    },
    /// Interpolation threshold of the ridgeless hinge perceptron.
    Threshold {
        #[arg(long)]
        eps: f64,
    },
    /// Power-law fit of the generalisation error over a log grid in alpha; the
    /// tail coefficient holds the exponent at -1/2 (square, hinge) or -1 (bo)
    /// over the top decade.
    Rate {
        /// `square`, `hinge` or `bo`.
        #[arg(long)]
        loss: String,
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long, default_value = "1")]
        lambda: String,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 10.0)]
        alpha_min: f64,
        #[arg(long, default_value_t = 1e4)]
        alpha_max: f64,
        #[arg(long, default_value_t = 25)]
        count: usize,
    },
    /// Regularisation minimising the generalisation error.
    CrossValidate {
        #[arg(long)]
        loss: Loss,
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        eps: f64,
    },
    /// Finite-size Monte Carlo estimate along a regularisation grid.
    Mc {
        #[arg(long)]
        loss: Loss,
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 2000)]
        d: usize,
        /// `min:max:count` (log-spaced) or a comma-separated list.
        #[arg(long, default_value = "1e-3:1e2:12")]
        lambda_grid: String,
        #[arg(long, default_value_t = 20)]
        repeats: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2000)]
        n_test: usize,
        /// Keep the constant kernel component.
        #[arg(long)]
        uncentered: bool,
        /// Interleave the matching theory rows.
        #[arg(long)]
        with_theory: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Coefficients and angle of the shipped kernel families.
    Kernels,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn lambda_setting(raw: &str) -> Result<LambdaSetting, CliError> {
    raw.parse().map_err(|e: String| CliError::config("lambda", e))
}

/// 2 when any row reports a solver failure.
fn row_status(rows: &[CsvRow]) -> u8 {
    let bad = rows.iter().any(|r| r.status.starts_with("nonconverged") || r.status.starts_with("error"));
    if bad {
        2
    } else {
        0
    }
}

fn run(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Bo { alpha, eps } => {
            let sol = solve_bo(alpha, eps)?;
            println!("alpha,eps,q_b,e_gen,converged");
            println!("{alpha:?},{eps:?},{:.16e},{:.16e},{}", sol.q_b, sol.gen_error(), sol.converged);
            Ok(if sol.converged { 0 } else { 2 })
        }
        Command::BoRate { eps, alpha_min, alpha_max, count } => {
            let alphas = log_grid(alpha_min, alpha_max, count)?;
            let curve = rate_curve(RateModel::Bayes, eps, &alphas)?;
            let fit = fit_rate(&curve)?;
            let tail = fit_coefficient(&curve, -1.0, alpha_max / 10.0)?;
            let constant = bo_rate_constant(eps)?;
            println!("eps,exponent,coefficient,r2,tail_coefficient,predicted_coefficient");
            println!(
                "{eps:?},{:.16e},{:.16e},{:.16e},{tail:.16e},{constant:.16e}",
                fit.exponent, fit.coefficient, fit.r2
            );
            Ok(0)
        }
        Command::StateEq { loss, kernel, lambda, alpha, eps, kappa } => {
            let geom = kernel.spec()?.geometry()?;
            let row = theory_row(0.0, loss, geom, lambda_setting(&lambda)?, alpha, eps, kappa);
            raf_cli::write_csv(std::slice::from_ref(&row), std::io::stdout().lock())?;
            Ok(row_status(std::slice::from_ref(&row)))
        }
        Command::SweepLambda { loss, kernel, alpha, eps, kappa, min, max, count, no_endpoints, output, gnuplot } => {
            let cfg = SweepConfig {
                quantity: Quantity::Lambda,
                grid: Grid { min, max, count, spacing: if min > 0.0 { Spacing::Log } else { Spacing::Linear } },
                loss,
                kernel: Some(kernel.spec()?),
                lambda: None,
                alpha: Some(alpha),
                eps: Some(eps),
                kappa,
                endpoints: !no_endpoints,
                output,
            };
            sweep(&cfg, gnuplot)
        }
        Command::SweepAngle { loss, lambda, alpha, eps, count, output, gnuplot } => {
            let cfg = SweepConfig {
                quantity: Quantity::Angle,
                grid: Grid { min: 0.0, max: std::f64::consts::FRAC_PI_2, count, spacing: Spacing::Linear },
                loss,
                kernel: None,
                lambda: Some(lambda_setting(&lambda)?),
                alpha: Some(alpha),
                eps: Some(eps),
                kappa: None,
                endpoints: false,
                output,
            };
            sweep(&cfg, gnuplot)
        }
        Command::Sweep { config, gnuplot } => {
            let text = std::fs::read_to_string(&config)?;
            let cfg = parse_config(&text)?;
            sweep(&cfg, gnuplot)
        }
        Command::Threshold { eps } => {
            let t = hinge_interp_threshold(eps)?;
            println!("eps,alpha_c,small_eps_asymptote");
            println!("{eps:?},{t:.16e},{:.16e}", hinge_threshold_asymptote(eps));
            Ok(0)
        }
        Command::Rate { loss, kernel, lambda, eps, alpha_min, alpha_max, count } => {
            let alphas = log_grid(alpha_min, alpha_max, count)?;
            let (model, predicted, law) = match loss.as_str() {
                "bo" => (RateModel::Bayes, Some(bo_rate_constant(eps)?), -1.0),
                other => {
                    let loss: Loss = other.parse().map_err(|e: raf_core::channel::ChannelError| CliError::config("loss", e.to_string()))?;
                    let geom = kernel.spec()?.geometry()?;
                    let predicted = if loss == Loss::Square { Some(krr_large_alpha_coeff(eps)?) } else { None };
                    (RateModel::Erm { loss, geom, lambda: lambda_setting(&lambda)? }, predicted, -0.5)
                }
            };
            let curve = rate_curve(model, eps, &alphas)?;
            let fit = fit_rate(&curve)?;
            let tail = fit_coefficient(&curve, law, alpha_max / 10.0)?;
            println!("eps,exponent,coefficient,r2,tail_coefficient,predicted_coefficient");
            let p = predicted.map(|c| format!("{c:.16e}")).unwrap_or_default();
            println!("{eps:?},{:.16e},{:.16e},{:.16e},{tail:.16e},{p}", fit.exponent, fit.coefficient, fit.r2);
            Ok(0)
        }
        Command::CrossValidate { loss, kernel, alpha, eps } => {
            let geom = kernel.spec()?.geometry()?;
            let cv = cross_validate_lambda(&ErmSpec::new(loss, geom, 1.0, alpha, eps)?)?;
            let lambda = match cv.lambda {
                LambdaChoice::Finite(l) => format!("{l:.16e}"),
                LambdaChoice::ZeroPlus => "0+".into(),
            };
            println!("lambda_opt,e_gen,e_mem,flagged");
            println!("{lambda},{:.16e},{:.16e},{}", cv.e_gen, cv.e_mem, cv.flagged);
            Ok(0)
        }
        Command::Mc {
            loss,
            kernel,
            alpha,
            eps,
            d,
            lambda_grid,
            repeats,
            seed,
            n_test,
            uncentered,
            with_theory,
            output,
        } => {
            let kernel = if kernel.kernel.is_none() && kernel.mu1.is_none() && kernel.gamma.is_none() {
                GeometrySpec::Family(KernelFamily::ReluArccos)
            } else {
                kernel.spec()?
            };
            let run = McRun {
                loss,
                kernel,
                alpha,
                eps,
                d,
                lambdas: parse_lambda_grid(&lambda_grid)?,
                repeats,
                seed,
                config: McConfig { n_test, centered: !uncentered, ..McConfig::default() },
                with_theory,
            };
            let rows = mc_rows(&run)?;
            raf_cli::sweep::write_rows(&rows, output.as_deref())?;
            Ok(row_status(&rows))
        }
        Command::Kernels => {
            println!("family,mu0,mu1,mustar,gamma");
            let families = [
                KernelFamily::Linear,
                KernelFamily::SignArcsine,
                KernelFamily::ErfArcsine,
                KernelFamily::ReluArccos,
                KernelFamily::Polynomial { c: 1.0, degree: 2 },
                KernelFamily::Exponential { beta: 1.0 },
                KernelFamily::SphericalGaussian { eta: 1.0 },
                KernelFamily::Geometric { g: 0.5 },
            ];
            for f in families {
                let g = f.geometry()?;
                println!("\"{f}\",{:.16e},{:.16e},{:.16e},{:.16e}", g.mu0, g.mu1, g.mu_star, g.angle()?);
            }
            let tanh = Activation::Tanh.geometry()?;
            println!("tanh-activation,{:.16e},{:.16e},{:.16e},{:.16e}", tanh.mu0, tanh.mu1, tanh.mu_star, tanh.angle()?);
            Ok(0)
        }
    }
}

fn sweep(cfg: &SweepConfig, gnuplot: Option<PathBuf>) -> Result<u8, CliError> {
    if gnuplot.is_some() && cfg.output.is_none() {
        return Err(CliError::config("output", "a gnuplot script needs an output file"));
    }
    let rows = write_sweep(cfg)?;
    if let (Some(script), Some(csv)) = (gnuplot, &cfg.output) {
        write_gnuplot_stub(csv, &script, cfg.grid.spacing == Spacing::Log)?;
    }
    Ok(row_status(&rows))
}

fn log_grid(min: f64, max: f64, count: usize) -> Result<Vec<f64>, CliError> {
    let grid = Grid { min, max, count, spacing: Spacing::Log };
    grid.validate()?;
    Ok(grid.points())
}

fn parse_lambda_grid(raw: &str) -> Result<Vec<f64>, CliError> {
    let bad = |m: String| CliError::config("lambda-grid", m);
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(format!("{:?} is not a number", s.trim())));
    let parts: Vec<&str> = raw.split(':').collect();
    let values = if parts.len() == 3 {
        let count = parts[2].trim().parse::<usize>().map_err(|_| bad(format!("{:?} is not a count", parts[2])))?;
        let grid = Grid { min: num(parts[0])?, max: num(parts[1])?, count, spacing: Spacing::Log };
        grid.validate().map_err(|e| bad(e.to_string()))?;
        grid.points()
    } else if parts.len() == 1 {
        raw.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    } else {
        return Err(bad("expected min:max:count or a comma-separated list".into()));
    };
    if values.is_empty() || values.iter().any(|&l| !(l >= 0.0 && l.is_finite())) {
        return Err(bad("values must be finite and >= 0".into()));
    }
    Ok(values)
}
