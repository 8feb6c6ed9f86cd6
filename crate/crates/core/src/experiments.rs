//! Named benchmark experiments with seeded noise and CSV reports.
//!
//! Each experiment perturbs a known function with seeded noise, differentiates
//! it, and records the relative L2 error of the recovered derivative per seed.
//! Seeds run in parallel; reports are assembled in seed order, so output files
//! are byte-identical across runs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::descent::{
    run_descent_observed, run_landweber_observed, DescentConfig, GradientKind, GradientScheme, HeuristicRule,
    IterationRecord, StoppingRule,
};
use crate::error::{Error, Result};
use crate::grid::{l2_norm, relative_l2_error, Grid, SampledFunction};
use crate::noise::{sample_noise, NoiseModel};
use crate::sobolev::{BoundaryKind, CgVariant};
use crate::transform::{transform_data, transform_data_with_boundary};

pub const EXPERIMENT_NAMES: [&str; 7] = [
    "example1_dense_s001",
    "example1_dense_s01",
    "example1_sparse_s001",
    "example2_mixture",
    "example3_nonzero_mean",
    "example4_kink",
    "landweber_contrast",
];

pub const DEFAULT_SEED_COUNT: u64 = 11;

/// Published errors of other differentiation methods on the cosine benchmark,
/// columns: dense `sigma = 0.01`, dense `sigma = 0.1`, sparse `sigma = 0.01`.
pub const COSINE_BASELINES: [(&str, [f64; 3]); 8] = [
    ("degree-2 polynomial", [0.0287, 0.3190, 0.2786]),
    ("tikhonov k=0", [0.7393, 0.8297, 0.7062]),
    ("tikhonov k=1", [0.1803, 0.3038, 0.6420]),
    ("tikhonov k=2", [0.0186, 0.0301, 0.4432]),
    ("cubic spline", [0.1060, 1.15, 0.3004]),
    ("convolution smoothing", [0.1059, 0.8603, 0.2098]),
    ("variational method", [0.1669, 0.7149, 0.3419]),
    ("sobolev descent", [0.0607, 0.0839, 0.1355]),
];

/// Published errors and iteration counts on the dense cosine benchmark, by
/// gradient: sobolev, cg-l2h1, cg-h1h1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradientComparison {
    pub sigma: f64,
    pub discrepancy_errors: [f64; 3],
    pub heuristic_errors: [f64; 3],
    pub discrepancy_iterations: [usize; 3],
    pub heuristic_iterations: [usize; 3],
}

pub const GRADIENT_COMPARISONS: [GradientComparison; 2] = [
    GradientComparison {
        sigma: 0.1,
        discrepancy_errors: [0.0839, 0.4364, 0.1522],
        heuristic_errors: [0.1299, 0.1299, 0.1299],
        discrepancy_iterations: [39, 4, 6],
        heuristic_iterations: [2, 2, 2],
    },
    GradientComparison {
        sigma: 0.01,
        discrepancy_errors: [0.0607, 0.0589, 0.0613],
        heuristic_errors: [0.1129, 0.1129, 0.1129],
        discrepancy_iterations: [84, 5, 18],
        heuristic_iterations: [3, 3, 3],
    },
];

/// Known function and derivative used to generate data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TruthPair {
    /// `cos x`.
    Cosine,
    /// `sin(x / 3)`.
    SineThird,
    /// `1 - t` up to `t = 0.5`, `t` after.
    Kink,
}

impl TruthPair {
    pub fn g(self, x: f64) -> f64 {
        match self {
            Self::Cosine => x.cos(),
            Self::SineThird => (x / 3.0).sin(),
            Self::Kink => {
                if x <= 0.5 {
                    1.0 - x
                } else {
                    x
                }
            }
        }
    }

    pub fn phi(self, x: f64) -> f64 {
        match self {
            Self::Cosine => -x.sin(),
            Self::SineThird => (x / 3.0).cos() / 3.0,
            Self::Kink => {
                if x <= 0.5 {
                    -1.0
                } else {
                    1.0
                }
            }
        }
    }
}

/// Stopping rule with the noise level left to be measured per seed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StopTemplate {
    /// Discrepancy rule with `delta` = norm of the drawn noise.
    Discrepancy {
        tau: f64,
    },
    Heuristic(HeuristicRule<f64>),
    Disabled,
}

impl StopTemplate {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Discrepancy { .. } => "discrepancy",
            Self::Heuristic(_) => "heuristic",
            Self::Disabled => "disabled",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Descent,
    Landweber,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceValue {
    pub label: &'static str,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub truth: TruthPair,
    pub interval: (f64, f64),
    pub n: usize,
    pub noise: NoiseModel,
    pub pin_endpoints: bool,
    /// Use the exact `g(a)`, `g(b)` in the transform instead of the noisy samples.
    pub trusted_boundary: bool,
    pub seeds: Vec<u64>,
    pub gradient: GradientScheme<f64>,
    pub stop: StopTemplate,
    pub max_iter: usize,
    pub method: Method,
    pub reference: Option<ReferenceValue>,
    /// Column of [`COSINE_BASELINES`] this experiment corresponds to.
    pub baseline_column: Option<usize>,
}

impl ExperimentSpec {
    pub fn grid(&self) -> Result<Grid<f64>> {
        Grid::uniform(self.interval.0, self.interval.1, self.n)
    }

    pub fn with_seeds(mut self, seeds: Vec<u64>) -> Self {
        self.seeds = seeds;
        self
    }
}

pub fn default_seeds() -> Vec<u64> {
    (0..DEFAULT_SEED_COUNT).collect()
}

fn sine_nodes() -> usize {
    (3.0 * std::f64::consts::PI / 0.01).ceil() as usize + 1
}

/// Resolves one of [`EXPERIMENT_NAMES`].
pub fn named_spec(name: &str) -> Result<ExperimentSpec> {
    let sobolev = GradientScheme::sobolev(BoundaryKind::Neumann);
    let discrepancy = StopTemplate::Discrepancy { tau: 1.0 };
    let cosine = |name: &str, n: usize, sigma: f64, column: usize| ExperimentSpec {
        name: name.to_string(),
        truth: TruthPair::Cosine,
        interval: (-0.5, 0.5),
        n,
        noise: NoiseModel::Gaussian { sigma },
        pin_endpoints: false,
        trusted_boundary: true,
        seeds: default_seeds(),
        gradient: sobolev,
        stop: discrepancy,
        max_iter: 2000,
        method: Method::Descent,
        reference: Some(ReferenceValue { label: "published single-draw error", value: COSINE_BASELINES[7].1[column] }),
        baseline_column: Some(column),
    };
    let sine = |name: &str, noise: NoiseModel, value: f64| ExperimentSpec {
        name: name.to_string(),
        truth: TruthPair::SineThird,
        interval: (0.0, 3.0 * std::f64::consts::PI),
        n: sine_nodes(),
        noise,
        pin_endpoints: true,
        trusted_boundary: false,
        seeds: default_seeds(),
        gradient: sobolev,
        stop: discrepancy,
        max_iter: 2000,
        method: Method::Descent,
        reference: Some(ReferenceValue { label: "published single-draw error", value }),
        baseline_column: None,
    };
    let spec = match name {
        "example1_dense_s001" => cosine(name, 101, 0.01, 0),
        "example1_dense_s01" => cosine(name, 101, 0.1, 1),
        "example1_sparse_s001" => cosine(name, 11, 0.01, 2),
        "example2_mixture" => sine(name, NoiseModel::MixtureUniformNormal { delta: 0.5, mix_prob: 0.5 }, 0.0071),
        "example3_nonzero_mean" => sine(name, NoiseModel::NonzeroMeanMixture { delta: 0.1, mix_prob: 0.5 }, 0.0719),
        "example4_kink" => ExperimentSpec {
            name: name.to_string(),
            truth: TruthPair::Kink,
            interval: (0.0, 1.0),
            n: 101,
            noise: NoiseModel::Uniform { delta: 0.01 },
            pin_endpoints: false,
            trusted_boundary: true,
            seeds: default_seeds(),
            gradient: sobolev.with_blend(0.5),
            stop: discrepancy,
            max_iter: 500,
            method: Method::Descent,
            reference: None,
            baseline_column: None,
        },
        "landweber_contrast" => ExperimentSpec {
            name: name.to_string(),
            gradient: GradientScheme::l2(),
            stop: StopTemplate::Disabled,
            max_iter: 400,
            method: Method::Landweber,
            reference: None,
            baseline_column: None,
            ..cosine(name, 101, 0.01, 0)
        },
        _ => {
            return Err(Error::UnknownExperiment { name: name.to_string(), valid: EXPERIMENT_NAMES.join(", ") });
        }
    };
    Ok(spec)
}

pub fn all_specs() -> Vec<ExperimentSpec> {
    EXPERIMENT_NAMES.iter().map(|n| named_spec(n).expect("built-in names resolve")).collect()
}

/// Short name of a gradient scheme, as accepted on the command line.
pub fn gradient_label(scheme: &GradientScheme<f64>) -> &'static str {
    match (scheme.kind, scheme.cg) {
        (GradientKind::L2, CgVariant::None) => "l2",
        (GradientKind::L2, CgVariant::L2H1) => "l2-cg-l2h1",
        (GradientKind::L2, CgVariant::H1H1) => "l2-cg-h1h1",
        (GradientKind::Sobolev { .. }, CgVariant::None) => "sobolev",
        (GradientKind::Sobolev { .. }, CgVariant::L2H1) => "cg-l2h1",
        (GradientKind::Sobolev { .. }, CgVariant::H1H1) => "cg-h1h1",
    }
}

/// Summary line for one seed.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedOutcome {
    pub seed: u64,
    pub rel_error: f64,
    pub iterations: usize,
    pub stop_reason: String,
}

/// Full trace of one seed.
#[derive(Clone, Debug)]
pub struct SeedRun {
    pub seed: u64,
    pub delta: f64,
    pub history: Vec<IterationRecord<f64>>,
    /// Relative error of every iterate.
    pub errors: Vec<f64>,
    pub phi_hat: Vec<f64>,
    pub selected_index: usize,
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub name: String,
    pub nodes: Vec<f64>,
    pub truth: Vec<f64>,
    pub outcomes: Vec<SeedOutcome>,
    pub runs: Vec<SeedRun>,
    pub failures: Vec<(u64, String)>,
    pub reference: Option<ReferenceValue>,
    pub baseline_column: Option<usize>,
}

impl ExperimentReport {
    pub fn errors(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.rel_error).filter(|e| e.is_finite()).collect()
    }

    pub fn median_error(&self) -> f64 {
        median(&self.errors())
    }

    pub fn mean_error(&self) -> f64 {
        let e = self.errors();
        e.iter().sum::<f64>() / e.len() as f64
    }

    pub fn std_error(&self) -> f64 {
        let e = self.errors();
        if e.len() < 2 {
            return 0.0;
        }
        let m = self.mean_error();
        (e.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (e.len() - 1) as f64).sqrt()
    }
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        0.5 * (v[k - 1] + v[k])
    }
}

/// Runs the experiment's method on every seed.
pub fn run_example(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    run_spec(spec, spec.method)
}

/// Runs the spec with the plain data-misfit iteration in place of `G`.
pub fn run_landweber_contrast(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    run_spec(spec, Method::Landweber)
}

fn run_spec(spec: &ExperimentSpec, method: Method) -> Result<ExperimentReport> {
    let grid = spec.grid()?;
    spec.noise.validate()?;
    let truth = SampledFunction::from_fn(grid, |x| spec.truth.phi(x));
    let results: Vec<(u64, Result<(SeedRun, SeedOutcome)>)> =
        spec.seeds.par_iter().map(|&seed| (seed, run_seed(spec, method, grid, &truth, seed))).collect();

    let mut outcomes = Vec::with_capacity(results.len());
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for (seed, result) in results {
        match result {
            Ok((run, outcome)) => {
                outcomes.push(outcome);
                runs.push(run);
            }
            Err(e) => {
                outcomes.push(SeedOutcome { seed, rel_error: f64::NAN, iterations: 0, stop_reason: "failed".into() });
                failures.push((seed, e.to_string()));
            }
        }
    }
    Ok(ExperimentReport {
        name: spec.name.clone(),
        nodes: grid.nodes(),
        truth: truth.into_values(),
        outcomes,
        runs,
        failures,
        reference: spec.reference,
        baseline_column: spec.baseline_column,
    })
}

fn run_seed(
    spec: &ExperimentSpec,
    method: Method,
    grid: Grid<f64>,
    truth: &SampledFunction<f64>,
    seed: u64,
) -> Result<(SeedRun, SeedOutcome)> {
    let clean = SampledFunction::from_fn(grid, |x| spec.truth.g(x));
    let noise = sample_noise(&spec.noise, &grid, seed, spec.pin_endpoints)?;
    let noisy = &clean + &noise;
    let delta = l2_norm(&noise);
    let data = if spec.trusted_boundary {
        transform_data_with_boundary(&noisy, clean.first(), clean.last())
    } else {
        transform_data(&noisy)
    };
    let stop = match spec.stop {
        StopTemplate::Discrepancy { tau } => StoppingRule::Discrepancy { delta, tau },
        StopTemplate::Heuristic(rule) => StoppingRule::Heuristic(rule),
        StopTemplate::Disabled => StoppingRule::Disabled,
    };
    let config =
        DescentConfig { gradient: spec.gradient, stop, max_iter: spec.max_iter, psi0: None, record_history: true };
    let mut errors = Vec::new();
    let mut observe = |_: usize, psi: &SampledFunction<f64>| {
        errors.push(relative_l2_error(psi, truth).unwrap_or(f64::NAN));
    };
    let report = match method {
        Method::Descent => run_descent_observed(&data, &config, &mut observe)?,
        Method::Landweber => run_landweber_observed(&data, &config, &mut observe)?,
    };
    let rel_error = relative_l2_error(&report.phi_hat, truth)?;
    let outcome =
        SeedOutcome { seed, rel_error, iterations: report.selected_index, stop_reason: report.stop_reason.to_string() };
    let run = SeedRun {
        seed,
        delta,
        history: report.history,
        errors,
        phi_hat: report.phi_hat.into_values(),
        selected_index: report.selected_index,
    };
    Ok((run, outcome))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
    }
    File::create(path).map(BufWriter::new).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn write_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Writes `seed,rel_error,iterations,stop_reason`, one row per seed.
pub fn write_report_csv(report: &ExperimentReport, path: &Path) -> Result<()> {
    write_rows(
        path,
        &["seed", "rel_error", "iterations", "stop_reason"],
        report.outcomes.iter().map(|o| {
            vec![o.seed.to_string(), o.rel_error.to_string(), o.iterations.to_string(), o.stop_reason.clone()]
        }),
    )
}

/// Reads a file written by [`write_report_csv`].
pub fn read_report_csv(path: &Path) -> Result<Vec<SeedOutcome>> {
    let mut r = csv::Reader::from_path(path).map_err(|source| Error::Csv { path: path.to_path_buf(), source })?;
    let parse = |message: String| Error::Parse { path: path.to_path_buf(), message };
    let mut out = Vec::new();
    for record in r.records() {
        let record = record.map_err(|source| Error::Csv { path: path.to_path_buf(), source })?;
        if record.len() != 4 {
            return Err(parse(format!("expected 4 fields, got {}", record.len())));
        }
        out.push(SeedOutcome {
            seed: record[0].parse().map_err(|e| parse(format!("seed: {e}")))?,
            rel_error: record[1].parse().map_err(|e| parse(format!("rel_error: {e}")))?,
            iterations: record[2].parse().map_err(|e| parse(format!("iterations: {e}")))?,
            stop_reason: record[3].to_string(),
        });
    }
    Ok(out)
}

/// Writes `iter,G,residual_g,residual_u,residual_uprime,alpha`.
pub fn write_history_csv(history: &[IterationRecord<f64>], path: &Path) -> Result<()> {
    write_rows(
        path,
        &["iter", "G", "residual_g", "residual_u", "residual_uprime", "alpha"],
        history.iter().map(|r| {
            vec![
                r.m.to_string(),
                r.g_value.to_string(),
                r.residual_g.to_string(),
                r.residual_u.to_string(),
                r.residual_uprime.to_string(),
                r.step_alpha.to_string(),
            ]
        }),
    )
}

/// Files produced by [`write_report`].
#[derive(Clone, Debug, Default)]
pub struct ReportFiles {
    pub summary: PathBuf,
    pub stats: PathBuf,
    pub trajectories: PathBuf,
    pub estimates: PathBuf,
    pub histories: Vec<PathBuf>,
}

/// Writes every CSV for `report` into `dir`, prefixed with the report name.
///
/// * `<name>.csv`: per-seed summary.
/// * `<name>_stats.csv`: median, mean and standard deviation, followed by
///   published reference values labelled as such.
/// * `<name>_trajectories.csv`: relative error of every iterate of every seed.
/// * `<name>_estimates.csv`: nodes, exact derivative and each seed's estimate.
/// * `<name>_history_seed<k>.csv`: per-iteration diagnostics.
pub fn write_report(report: &ExperimentReport, dir: &Path) -> Result<ReportFiles> {
    let name = &report.name;
    let files = ReportFiles {
        summary: dir.join(format!("{name}.csv")),
        stats: dir.join(format!("{name}_stats.csv")),
        trajectories: dir.join(format!("{name}_trajectories.csv")),
        estimates: dir.join(format!("{name}_estimates.csv")),
        histories: report.runs.iter().map(|r| dir.join(format!("{name}_history_seed{}.csv", r.seed))).collect(),
    };
    write_report_csv(report, &files.summary)?;
    write_stats_csv(report, &files.stats)?;
    write_rows(
        &files.trajectories,
        &["seed", "iter", "rel_error"],
        report.runs.iter().flat_map(|run| {
            run.errors.iter().enumerate().map(move |(m, e)| vec![run.seed.to_string(), m.to_string(), e.to_string()])
        }),
    )?;
    let mut header = vec!["x".to_string(), "phi".to_string()];
    header.extend(report.runs.iter().map(|r| format!("seed{}", r.seed)));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_rows(
        &files.estimates,
        &header,
        (0..report.nodes.len()).map(|i| {
            let mut row = vec![report.nodes[i].to_string(), report.truth[i].to_string()];
            row.extend(report.runs.iter().map(|r| r.phi_hat[i].to_string()));
            row
        }),
    )?;
    for (run, path) in report.runs.iter().zip(&files.histories) {
        write_history_csv(&run.history, path)?;
    }
    Ok(files)
}

fn write_stats_csv(report: &ExperimentReport, path: &Path) -> Result<()> {
    let mut rows = vec![
        vec!["median rel_error".into(), report.median_error().to_string(), "computed".into()],
        vec!["mean rel_error".into(), report.mean_error().to_string(), "computed".into()],
        vec!["std rel_error".into(), report.std_error().to_string(), "computed".into()],
        vec!["failed seeds".into(), report.failures.len().to_string(), "computed".into()],
    ];
    if let Some(r) = report.reference {
        rows.push(vec![r.label.into(), r.value.to_string(), "published reference".into()]);
    }
    if let Some(column) = report.baseline_column {
        for (label, values) in COSINE_BASELINES.iter().take(COSINE_BASELINES.len() - 1) {
            rows.push(vec![format!("{label} rel_error"), values[column].to_string(), "published reference".into()]);
        }
    }
    write_rows(path, &["statistic", "value", "source"], rows)
}

/// Prints a one-line-per-seed table followed by the summary statistics.
pub fn print_summary(report: &ExperimentReport, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "{}", report.name)?;
    writeln!(out, "{:>6} {:>12} {:>10}  stop", "seed", "rel_error", "iterations")?;
    for o in &report.outcomes {
        writeln!(out, "{:>6} {:>12.6} {:>10}  {}", o.seed, o.rel_error, o.iterations, o.stop_reason)?;
    }
    writeln!(
        out,
        "median {:.6}  mean {:.6}  std {:.6}",
        report.median_error(),
        report.mean_error(),
        report.std_error()
    )?;
    if let Some(r) = report.reference {
        writeln!(out, "{} (published reference): {}", r.label, r.value)?;
    }
    for (seed, message) in &report.failures {
        writeln!(out, "seed {seed} failed: {message}")?;
    }
    Ok(())
}
