//! `regdiff`: differentiate noisy samples, run the benchmark experiments, and
//! sweep them over gradient, stopping rule and noise level.
//!
//! Exit status: 0 on success, 1 on I/O or numerical failure, 2 on invalid
//! usage or input.

// `!(x > 0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod input;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::builder::PossibleValuesParser;
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use regdiff::descent::{
    run_descent, straight_line, DescentConfig, GradientKind, GradientScheme, HeuristicRule, StoppingRule,
};
use regdiff::experiments::{
    gradient_label, median, named_spec, print_summary, run_example, write_history_csv, write_report, ExperimentReport,
    ExperimentSpec, StopTemplate, DEFAULT_SEED_COUNT, EXPERIMENT_NAMES,
};
use regdiff::noise::{sample_noise, NoiseModel};
use regdiff::sobolev::{BoundaryKind, CgVariant};
use regdiff::transform::{transform_data, transform_data_with_boundary};
use regdiff::{Error, SampledFunction64};

#[derive(Debug)]
pub enum CliError {
    /// Invalid flags or input data; exit status 2.
    Usage(String),
    /// Unreadable or unwritable files, failed runs; exit status 1.
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            Self::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) | Self::Io(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io { .. }
            | Error::Csv { .. }
            | Error::DegenerateDirection { .. }
            | Error::NonFiniteObjective { .. } => Self::Io(e.to_string()),
            _ => Self::Usage(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "regdiff", version, about = "Stable derivatives of noisy sampled functions by regularized descent")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Differentiate a two-column x,y CSV sampled on a uniform grid.
    Differentiate(DifferentiateArgs),
    /// Run a named benchmark experiment (or `all`) over several noise seeds.
    Experiment(ExperimentArgs),
    /// Run an experiment for every combination of gradient, stopping rule and noise level.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum GradientArg {
    /// Plain L2 gradient.
    L2,
    /// Sobolev gradient, steepest descent.
    Sobolev,
    /// Sobolev gradient with Polak-Ribiere directions, L2/H1 ratio.
    CgL2h1,
    /// Sobolev gradient with Polak-Ribiere directions, H1/H1 ratio.
    CgH1h1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BcArg {
    Dirichlet,
    Neumann,
    /// Pinned at a, free at b.
    RobinLeft,
    /// Free at a, pinned at b.
    RobinRight,
}

impl From<BcArg> for BoundaryKind {
    fn from(bc: BcArg) -> Self {
        match bc {
            BcArg::Dirichlet => Self::Dirichlet,
            BcArg::Neumann => Self::Neumann,
            BcArg::RobinLeft => Self::RobinLeft,
            BcArg::RobinRight => Self::RobinRight,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum StopArg {
    /// Stop once the fit is within tau * delta of the data.
    Discrepancy,
    /// Stop at the first uptick or plateau of the integrated residual.
    Heuristic,
    /// Run until --max-iter.
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum NoiseArg {
    Gaussian,
    Uniform,
    Mixture,
    NonzeroMean,
}

#[derive(Args, Debug)]
struct HeuristicArgs {
    /// Relative increase of the integrated residual counted as an uptick.
    #[arg(long, default_value_t = 1e-3)]
    uptick: f64,
    /// Number of trailing steps compared for a plateau.
    #[arg(long, default_value_t = 3)]
    patience: usize,
    /// Relative change below which the integrated residual counts as flat.
    #[arg(long, default_value_t = 1e-4)]
    sat_tol: f64,
}

impl HeuristicArgs {
    fn rule(&self) -> HeuristicRule<f64> {
        HeuristicRule { uptick: self.uptick, patience: self.patience, sat_tol: self.sat_tol }
    }
}

#[derive(Args, Debug)]
struct DifferentiateArgs {
    /// Input CSV with columns x,y; an optional header row is skipped.
    input: PathBuf,
    /// Output CSV with columns x, derivative, smoothed_fit
    /// [default: <input stem>_derivative.csv next to the input].
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Descent direction.
    #[arg(long, value_enum, default_value_t = GradientArg::Sobolev)]
    gradient: GradientArg,
    /// Boundary condition of the Sobolev gradient [default: neumann, or dirichlet with --phi-a/--phi-b].
    #[arg(long, value_enum)]
    bc: Option<BcArg>,
    /// Weight of the Sobolev part of the gradient; the rest is the L2 gradient.
    #[arg(long, default_value_t = 1.0)]
    blend: f64,
    /// Stopping rule; discrepancy requires --delta.
    #[arg(long, value_enum, default_value_t = StopArg::Heuristic)]
    stop: StopArg,
    /// L2 norm of the noise over the interval, about sigma * sqrt(b - a) for i.i.d. noise of standard deviation sigma.
    #[arg(long)]
    delta: Option<f64>,
    /// Safety factor of the discrepancy rule.
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    /// Maximum number of iterates, counting the initial one.
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    /// Known derivative at a; with --phi-b, starts from the straight line and keeps both ends fixed.
    #[arg(long, requires = "phi_b", allow_negative_numbers = true)]
    phi_a: Option<f64>,
    /// Known derivative at b.
    #[arg(long, requires = "phi_a", allow_negative_numbers = true)]
    phi_b: Option<f64>,
    /// Trusted value of the function at a, used instead of the first sample.
    #[arg(long, requires = "g_b", allow_negative_numbers = true)]
    g_a: Option<f64>,
    /// Trusted value of the function at b, used instead of the last sample.
    #[arg(long, requires = "g_a", allow_negative_numbers = true)]
    g_b: Option<f64>,
    /// Add synthetic noise to the input before differentiating.
    #[arg(long, value_enum)]
    add_noise: Option<NoiseArg>,
    /// Standard deviation (gaussian) or half-width (other models) of the added noise.
    #[arg(long, default_value_t = 0.01)]
    noise_level: f64,
    /// Probability of the uniform component in mixture models.
    #[arg(long, default_value_t = 0.5)]
    mix_prob: f64,
    /// Seed of the added noise.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    heuristic: HeuristicArgs,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Number of noise seeds, numbered from --first-seed.
    #[arg(long, default_value_t = DEFAULT_SEED_COUNT)]
    seeds: u64,
    /// First noise seed.
    #[arg(long, default_value_t = 0)]
    first_seed: u64,
    /// Directory receiving the CSV reports.
    #[arg(long, default_value = "results")]
    out_dir: PathBuf,
    /// Worker threads [default: all cores].
    #[arg(long)]
    jobs: Option<usize>,
    /// Override the experiment's maximum number of iterates.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Safety factor of the discrepancy rule.
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    /// Print per-seed tables.
    #[arg(long)]
    verbose: bool,
    #[command(flatten)]
    heuristic: HeuristicArgs,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// Experiment name, or `all`.
    #[arg(value_parser = experiment_parser(true))]
    name: String,
    /// Override the experiment's descent direction.
    #[arg(long, value_enum)]
    gradient: Option<GradientArg>,
    /// Override the experiment's stopping rule.
    #[arg(long, value_enum)]
    stop: Option<StopArg>,
    /// Override the experiment's noise level (standard deviation or half-width).
    #[arg(long)]
    noise_level: Option<f64>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Experiment to sweep.
    #[arg(value_parser = experiment_parser(false))]
    name: String,
    /// Comma-separated descent directions [default: the experiment's own].
    #[arg(long, value_enum, value_delimiter = ',', num_args = 0..)]
    gradients: Option<Vec<GradientArg>>,
    /// Comma-separated stopping rules [default: the experiment's own].
    #[arg(long, value_enum, value_delimiter = ',', num_args = 0..)]
    stops: Option<Vec<StopArg>>,
    /// Comma-separated noise levels [default: the experiment's own].
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    noise_levels: Option<Vec<f64>>,
    #[command(flatten)]
    run: RunArgs,
}

fn experiment_parser(with_all: bool) -> PossibleValuesParser {
    let mut names: Vec<&'static str> = EXPERIMENT_NAMES.to_vec();
    if with_all {
        names.push("all");
    }
    PossibleValuesParser::new(names)
}

fn main() -> ExitCode {
    let command = Cli::command().after_help(format!("Experiments: {}", EXPERIMENT_NAMES.join(", ")));
    let cli = match command.try_get_matches().and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Differentiate(args) => cmd_differentiate(&args),
        Command::Experiment(args) => cmd_experiment(&args),
        Command::Sweep(args) => cmd_sweep(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn scheme(gradient: GradientArg, sobolev: GradientScheme<f64>) -> GradientScheme<f64> {
    let sobolev = match sobolev.kind {
        GradientKind::Sobolev { .. } => sobolev,
        GradientKind::L2 => GradientScheme::sobolev(BoundaryKind::Neumann),
    };
    match gradient {
        GradientArg::L2 => GradientScheme::l2(),
        GradientArg::Sobolev => sobolev.with_cg(CgVariant::None),
        GradientArg::CgL2h1 => sobolev.with_cg(CgVariant::L2H1),
        GradientArg::CgH1h1 => sobolev.with_cg(CgVariant::H1H1),
    }
}

fn noise_model(kind: NoiseArg, level: f64, mix_prob: f64) -> NoiseModel {
    match kind {
        NoiseArg::Gaussian => NoiseModel::Gaussian { sigma: level },
        NoiseArg::Uniform => NoiseModel::Uniform { delta: level },
        NoiseArg::Mixture => NoiseModel::MixtureUniformNormal { delta: level, mix_prob },
        NoiseArg::NonzeroMean => NoiseModel::NonzeroMeanMixture { delta: level, mix_prob },
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}.csv"))
}

fn cmd_differentiate(args: &DifferentiateArgs) -> Result<(), CliError> {
    let boundary_phi = args.phi_a.zip(args.phi_b);
    let bc = match (args.bc, boundary_phi) {
        (None, Some(_)) | (Some(BcArg::Dirichlet), Some(_)) => BoundaryKind::Dirichlet,
        (Some(BcArg::Dirichlet), None) => {
            return Err(CliError::Usage("--bc dirichlet requires --phi-a and --phi-b".into()));
        }
        (Some(bc), Some(_)) => {
            return Err(CliError::Usage(format!(
                "--phi-a/--phi-b fix both ends and need --bc dirichlet, got --bc {}",
                value_name(&bc)
            )));
        }
        (Some(bc), None) => bc.into(),
        (None, None) => BoundaryKind::Neumann,
    };
    let stop = match args.stop {
        StopArg::Discrepancy => {
            let delta = args.delta.ok_or_else(|| CliError::Usage("--stop discrepancy requires --delta".into()))?;
            StoppingRule::Discrepancy { delta, tau: args.tau }
        }
        StopArg::Heuristic => StoppingRule::Heuristic(args.heuristic.rule()),
        StopArg::None => StoppingRule::Disabled,
    };

    let mut samples = input::read_samples(&args.input)?;
    let grid = *samples.grid();
    if let Some(kind) = args.add_noise {
        let noise = sample_noise(&noise_model(kind, args.noise_level, args.mix_prob), &grid, args.seed, false)?;
        samples = &samples + &noise;
    }
    let data = match args.g_a.zip(args.g_b) {
        Some((ga, gb)) => transform_data_with_boundary(&samples, ga, gb),
        None => transform_data(&samples),
    };
    let config = DescentConfig {
        gradient: scheme(args.gradient, GradientScheme::sobolev(bc).with_blend(args.blend)),
        stop,
        max_iter: args.max_iter,
        psi0: boundary_phi.map(|(l, r)| straight_line(grid, l, r)),
        record_history: true,
    };
    let report = run_descent(&data, &config)?;

    let output = args.output.clone().unwrap_or_else(|| sibling(&args.input, "_derivative"));
    write_estimate(&output, &report.phi_hat, &report.data_fit)?;
    let history = sibling(&output, "_history");
    write_history_csv(&report.history, &history)?;
    println!(
        "{}: stopped by {} at iterate {}, selected iterate {}; wrote {} and {}",
        args.input.display(),
        report.stop_reason,
        report.stop_index,
        report.selected_index,
        output.display(),
        history.display()
    );
    Ok(())
}

fn write_estimate(path: &Path, phi: &SampledFunction64, fit: &SampledFunction64) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(["x", "derivative", "smoothed_fit"]).map_err(io)?;
    for (i, x) in phi.grid().nodes().into_iter().enumerate() {
        w.write_record([x.to_string(), phi[i].to_string(), fit[i].to_string()]).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Settings applied on top of a named experiment.
#[derive(Clone, Copy, Debug)]
struct Cell {
    gradient: Option<GradientArg>,
    stop: Option<StopArg>,
    noise_level: Option<f64>,
}

fn configure(name: &str, cell: Cell, run: &RunArgs) -> Result<ExperimentSpec, CliError> {
    let mut spec = named_spec(name)?.with_seeds((run.first_seed..run.first_seed + run.seeds).collect());
    if let Some(g) = cell.gradient {
        spec.gradient = scheme(g, spec.gradient);
    }
    match cell.stop {
        Some(StopArg::Discrepancy) => spec.stop = StopTemplate::Discrepancy { tau: run.tau },
        Some(StopArg::Heuristic) => spec.stop = StopTemplate::Heuristic(run.heuristic.rule()),
        Some(StopArg::None) => spec.stop = StopTemplate::Disabled,
        None => {
            if let StopTemplate::Discrepancy { .. } = spec.stop {
                spec.stop = StopTemplate::Discrepancy { tau: run.tau };
            }
        }
    }
    if let Some(level) = cell.noise_level {
        spec.noise = spec.noise.with_level(level);
    }
    spec.noise.validate()?;
    if let Some(m) = run.max_iter {
        if m == 0 {
            return Err(CliError::Usage("--max-iter must be at least 1".into()));
        }
        spec.max_iter = m;
    }
    Ok(spec)
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        builder = builder.num_threads(j);
    }
    builder.build().map_err(|e| CliError::Io(e.to_string()))
}

fn finish(report: &ExperimentReport, dir: &Path, verbose: bool) -> Result<(), CliError> {
    write_report(report, dir)?;
    let mut out = std::io::stdout().lock();
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    if verbose {
        print_summary(report, &mut out).map_err(io)?;
    } else {
        writeln!(
            out,
            "{}: median rel error {:.6} over {} seeds",
            report.name,
            report.median_error(),
            report.outcomes.len()
        )
        .map_err(io)?;
    }
    for (seed, message) in &report.failures {
        eprintln!("{}: seed {seed} failed: {message}", report.name);
    }
    Ok(())
}

fn any_failed(reports: &[ExperimentReport]) -> Result<(), CliError> {
    let failed: usize = reports.iter().map(|r| r.failures.len()).sum();
    if failed > 0 {
        return Err(CliError::Io(format!("{failed} seed run(s) failed; reports were written")));
    }
    Ok(())
}

fn cmd_experiment(args: &ExperimentArgs) -> Result<(), CliError> {
    let names: Vec<&str> = if args.name == "all" { EXPERIMENT_NAMES.to_vec() } else { vec![args.name.as_str()] };
    let cell = Cell { gradient: args.gradient, stop: args.stop, noise_level: args.noise_level };
    let specs = names.iter().map(|n| configure(n, cell, &args.run)).collect::<Result<Vec<_>, _>>()?;
    let pool = pool(args.run.jobs)?;
    let mut reports = Vec::new();
    for spec in &specs {
        let report = pool.install(|| run_example(spec))?;
        finish(&report, &args.run.out_dir, args.run.verbose)?;
        reports.push(report);
    }
    any_failed(&reports)
}

fn value_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let gradients: Vec<Option<GradientArg>> = match &args.gradients {
        Some(list) => list.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    let stops: Vec<Option<StopArg>> = match &args.stops {
        Some(list) => list.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    let levels: Vec<Option<f64>> = match &args.noise_levels {
        Some(list) => list.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    let mut cells = Vec::new();
    for &gradient in &gradients {
        for &stop in &stops {
            for &noise_level in &levels {
                cells.push(Cell { gradient, stop, noise_level });
            }
        }
    }
    if cells.is_empty() {
        return Err(CliError::Usage("sweep has no cells: every list must name at least one value".into()));
    }
    let specs = cells.iter().map(|&c| configure(&args.name, c, &args.run)).collect::<Result<Vec<_>, _>>()?;
    let labels: Vec<String> = specs
        .iter()
        .enumerate()
        .map(|(k, s)| format!("cell{k:02}_{}_{}_{}", gradient_label(&s.gradient), s.stop.label(), s.noise.level()))
        .collect();

    let pool = pool(args.run.jobs)?;
    let results: Vec<Result<ExperimentReport, Error>> = pool.install(|| specs.par_iter().map(run_example).collect());
    let reports = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    for ((report, spec), label) in reports.iter().zip(&specs).zip(&labels) {
        let dir = args.run.out_dir.join(label);
        finish(report, &dir, args.run.verbose)?;
        let iterations: Vec<f64> = report.outcomes.iter().map(|o| o.iterations as f64).collect();
        rows.push([
            label.clone(),
            spec.name.clone(),
            gradient_label(&spec.gradient).to_string(),
            spec.stop.label().to_string(),
            spec.noise.level().to_string(),
            report.median_error().to_string(),
            report.mean_error().to_string(),
            median(&iterations).to_string(),
            report.failures.len().to_string(),
            Path::new(label).join(format!("{}.csv", report.name)).display().to_string(),
        ]);
    }
    let index = args.run.out_dir.join(format!("{}_sweep.csv", args.name));
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", index.display()));
    std::fs::create_dir_all(&args.run.out_dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.run.out_dir.display())))?;
    let mut w = csv::Writer::from_path(&index).map_err(io)?;
    w.write_record([
        "cell",
        "experiment",
        "gradient",
        "stop",
        "noise_level",
        "median_rel_error",
        "mean_rel_error",
        "median_iterations",
        "failed_seeds",
        "summary",
    ])
    .map_err(io)?;
    for row in &rows {
        w.write_record(row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(format!("{}: {e}", index.display())))?;
    println!("wrote {} cells, index {}", rows.len(), index.display());
    any_failed(&reports)
}
