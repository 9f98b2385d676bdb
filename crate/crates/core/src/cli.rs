//! Command-line front end.
//!
//! Exit codes: `0` success (for `run`, the accuracy criterion was met), `2`
//! when `run` used every step without meeting it, `1` on any error.

use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use crate::bench::{bench, BenchConfig};
use crate::error::{Error, Result};
use crate::format::{self, load_dataset, load_domain, write_dataset, write_file, write_points, write_result};
use crate::geometry::{exact_packing, greedy_packing, grid_cover, solve_r, volumetric_bound, ThresholdQuery, MAX_EXACT_PACKING};
use crate::holgrim::{run, Config, Termination};
use crate::problems::{gen_problem, DomainSpec, Family, GeneratorSpec, Scaling};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_MAX_STEPS: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "holgrim", version, about = "Sparse approximation of Lip(γ) function combinations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FamilyArg {
    Gaussian,
    Polynomial,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ScalingArg {
    /// Exact Lip norm on the generated points.
    Lip,
    /// Analytic bound valid on the unit cube.
    Analytic,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset.
    Gen {
        #[arg(long, value_enum, default_value = "gaussian")]
        family: FamilyArg,
        #[arg(long, default_value_t = 100)]
        features: usize,
        /// Number of uniform random points in the unit cube.
        #[arg(long, default_value_t = 50, conflicts_with = "cover_delta")]
        points: usize,
        /// Use a grid cover of the unit cube with this radius instead.
        #[arg(long)]
        cover_delta: Option<f64>,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 1)]
        outputs: usize,
        #[arg(long, default_value_t = 2.0)]
        gamma: f64,
        #[arg(long, default_value_t = 0.2)]
        min_width: f64,
        #[arg(long, default_value_t = 0.4)]
        max_width: f64,
        #[arg(long, default_value_t = 3)]
        degree: u32,
        /// Draw only positive coefficients.
        #[arg(long)]
        positive: bool,
        #[arg(long, value_enum, default_value = "lip")]
        scaling: ScalingArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Check a dataset, and optionally re-score a result against it.
    Validate {
        dataset: PathBuf,
        #[arg(long)]
        result: Option<PathBuf>,
    },
    /// Run the sparse approximation on a dataset.
    Run {
        dataset: PathBuf,
        /// Target accuracy; a trailing `C` scales by the norm budget (`0.1C`).
        #[arg(long)]
        epsilon: String,
        #[arg(long, default_value_t = 0.0)]
        epsilon0: f64,
        /// Defaults to the top jet order.
        #[arg(long)]
        order_level: Option<usize>,
        /// Defaults to the largest count the point budgets allow.
        #[arg(long)]
        max_steps: Option<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        shuffles: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        budgets: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Write a grid cover of the unit cube.
    Cover {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        delta: f64,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Packing sizes of a point set (dataset or points file).
    Pack {
        file: PathBuf,
        #[arg(long)]
        radius: f64,
    },
    /// Solve for the point-separation radius.
    Rsolve {
        #[arg(long)]
        norm_budget: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.0)]
        epsilon0: f64,
        #[arg(long, default_value_t = 1)]
        outputs: usize,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        order_level: usize,
    },
    /// Time the phases over growing feature counts and domains.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "1000,2000,4000")]
        features: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        fixed_points: usize,
        #[arg(long, value_delimiter = ',', default_value = "50,100,200")]
        points: Vec<usize>,
        #[arg(long, default_value_t = 1000)]
        fixed_features: usize,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_epsilon(text: &str, norm_budget: f64) -> Result<f64> {
    let (number, scale) = match text.strip_suffix(['C', 'c']) {
        Some(rest) => (rest, norm_budget),
        None => (text, 1.0),
    };
    number
        .trim()
        .parse::<f64>()
        .map(|v| v * scale)
        .map_err(|_| Error::Config(format!("cannot read epsilon from `{text}`")))
}

fn io_err(e: std::io::Error) -> Error {
    Error::Io { path: PathBuf::from("<stdout>"), source: e }
}

/// Executes a parsed command, writing the report to `out`; returns the exit
/// code.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Gen {
            family,
            features,
            points,
            cover_delta,
            dim,
            outputs,
            gamma,
            min_width,
            max_width,
            degree,
            positive,
            scaling,
            seed,
            out: path,
        } => {
            let domain = match cover_delta {
                Some(delta) => DomainSpec::Explicit(Arc::new(grid_cover(dim, delta)?)),
                None => DomainSpec::Random { points },
            };
            let spec = GeneratorSpec {
                family: match family {
                    FamilyArg::Gaussian => Family::Gaussian { min_width, max_width },
                    FamilyArg::Polynomial => Family::Polynomial { max_degree: degree },
                },
                features,
                domain,
                gamma,
                dim,
                outputs,
                positive,
                scaling: match scaling {
                    ScalingArg::Lip => Scaling::LipNorm,
                    ScalingArg::Analytic => Scaling::Analytic,
                },
                seed,
            };
            let problem = gen_problem(&spec)?;
            write_file(&path, &write_dataset(&problem))?;
            writeln!(
                out,
                "wrote {}: {} features on {} points, C = {}",
                path.display(),
                problem.len(),
                problem.domain().len(),
                format::num(problem.norm_budget())
            )
            .map_err(io_err)?;
            Ok(EXIT_OK)
        }
        Command::Validate { dataset, result } => {
            let problem = load_dataset(&dataset)?;
            writeln!(
                out,
                "{}: ok (d = {}, c = {}, gamma = {}, points = {}, features = {}, C = {})",
                dataset.display(),
                problem.dim(),
                problem.outputs(),
                problem.gamma(),
                problem.domain().len(),
                problem.len(),
                format::num(problem.norm_budget())
            )
            .map_err(io_err)?;
            if let Some(path) = result {
                let summary = format::parse_result(&path, &format::read_to_string(&path)?)?;
                let scored = format::rescore(&problem, &summary)?;
                let deviation = scored.deviation(&summary);
                writeln!(
                    out,
                    "{}: coefficient-sum {} final-functional-max {} final-lambda-max {} (deviation {:e})",
                    path.display(),
                    format::num(scored.coefficient_sum),
                    format::num(scored.final_functional_max),
                    format::num(scored.final_lambda_max),
                    deviation
                )
                .map_err(io_err)?;
                if deviation > 1e-12 * (1.0 + summary.coefficient_sum.abs()) {
                    return Err(Error::Problem(format!(
                        "result {} does not match the dataset (deviation {deviation:e})",
                        path.display()
                    )));
                }
            }
            Ok(EXIT_OK)
        }
        Command::Run {
            dataset,
            epsilon,
            epsilon0,
            order_level,
            max_steps,
            shuffles,
            budgets,
            seed,
            out: path,
        } => {
            let problem = load_dataset(&dataset)?;
            let epsilon = parse_epsilon(&epsilon, problem.norm_budget())?;
            let max_steps = match max_steps {
                Some(m) => m,
                None => {
                    let per_step = budgets.first().copied().unwrap_or(1).max(1);
                    (Config::max_single_steps(&problem) / per_step).max(1)
                }
            };
            let config = Config {
                epsilon,
                epsilon0,
                order_level: order_level.unwrap_or(problem.max_order()),
                max_steps,
                shuffles,
                budgets,
                seed,
            };
            let result = run(&problem, &config)?;
            if let Some(path) = &path {
                write_file(path, &write_result(&result, &dataset.display().to_string()))?;
            }
            let termination = match result.termination {
                Termination::Criterion { at_step } => format!("criterion before step {at_step}"),
                Termination::MaxSteps => "max steps".to_string(),
            };
            writeln!(
                out,
                "steps {} ({termination}), support {}, final-lambda-max {} (epsilon {}), coefficient-sum {} (C {})",
                result.steps_completed(),
                result.support.len(),
                format::num(result.final_lambda_max),
                format::num(epsilon),
                format::num(result.coefficient_sum),
                format::num(result.norm_budget)
            )
            .map_err(io_err)?;
            let exceeded = result.exceeded_steps();
            if !exceeded.is_empty() {
                writeln!(out, "recombination residual above tolerance at steps {exceeded:?}").map_err(io_err)?;
            }
            Ok(if result.criterion_met { EXIT_OK } else { EXIT_MAX_STEPS })
        }
        Command::Cover { dim, delta, out: path } => {
            let cover = grid_cover(dim, delta)?;
            write_file(&path, &write_points(&cover))?;
            writeln!(out, "wrote {}: {} points", path.display(), cover.len()).map_err(io_err)?;
            Ok(EXIT_OK)
        }
        Command::Pack { file, radius } => {
            let domain = load_domain(&file)?;
            let greedy = greedy_packing(&domain, radius)?.len();
            writeln!(out, "greedy {greedy}").map_err(io_err)?;
            if domain.len() <= MAX_EXACT_PACKING {
                writeln!(out, "exact {}", exact_packing(&domain, radius)?).map_err(io_err)?;
            } else {
                writeln!(out, "exact unavailable ({} points > {MAX_EXACT_PACKING})", domain.len()).map_err(io_err)?;
            }
            match volumetric_bound(domain.dim(), radius) {
                Ok(v) => writeln!(out, "volumetric {}", format::num(v)).map_err(io_err)?,
                Err(_) => writeln!(out, "volumetric unavailable (radius outside (0, 1))").map_err(io_err)?,
            }
            Ok(EXIT_OK)
        }
        Command::Rsolve { norm_budget, gamma, epsilon, epsilon0, outputs, dim, order_level } => {
            let query = ThresholdQuery {
                norm_budget,
                gamma,
                epsilon,
                epsilon0,
                outputs,
                dim,
                level: order_level,
            };
            let r = solve_r(&query)?;
            writeln!(out, "r {}", format::num(r)).map_err(io_err)?;
            if epsilon0 == 0.0 {
                writeln!(out, "closed-form {}", format::num(query.closed_form())).map_err(io_err)?;
            }
            Ok(EXIT_OK)
        }
        Command::Bench { features, fixed_points, points, fixed_features, steps, repeats, seed } => {
            let config = BenchConfig {
                feature_grid: features,
                fixed_points,
                point_grid: points,
                fixed_features,
                steps,
                repeats,
                seed,
                ..BenchConfig::default()
            };
            let report = bench(&config)?;
            write!(out, "{}", report.render()).map_err(io_err)?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args`, runs the command and maps errors to exit code 1.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    match execute(cli, &mut stdout.lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
