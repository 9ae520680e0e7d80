//! Command-line interface: five subcommands over the library.
//!
//! - `score`: closed-form uncertainty report for one concentration vector.
//! - `estimate`: fit concentrations to simplex samples from a CSV.
//! - `verify`: seeded analytic-vs-Monte-Carlo self-check suite.
//! - `al-run`: pool-based active-learning benchmark writing curve CSVs.
//! - `plot-data`: aggregate curve CSVs into mean/std rows for plotting.
//!
//! Every flag can also be supplied through an optional plain-text
//! `key = value` config file (`--config`); explicit flags win on conflict
//! and unknown config keys are rejected. All numeric report output is
//! printed with 12 significant digits so reruns and golden files are
//! byte-stable, and every command is deterministic given its flags.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input parse error,
//! 3 domain error, 4 all-degenerate estimation failure.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::active::{run_active_learning, ALConfig, AcquisitionStrategy, RunAbort};
use crate::data::{
    read_curves, read_idx, read_simplex_csv, subsample, synth_blobs, write_curves,
    write_scores, LabeledDataset, LearningCurveRecord, ScoreDumpRecord,
};
use crate::derive_seed;
use crate::dirichlet::DirichletParams;
use crate::error::{Error, Result};
use crate::estimation::{fixed_point_estimate, EstimationConfig, StatisticMode};
use crate::model::ModelConfig;
use crate::uncertainty::{
    bald_block_bootstrap_se, empirical_bald, UncertaintyReport,
};

/// Absolute tolerance for the closed-form identity checks in `verify`.
const IDENTITY_TOL: f64 = 1e-9;
/// Tolerance for the exact uniform-binary moment anchors in `verify`.
const ANCHOR_TOL: f64 = 1e-10;
/// Monte Carlo checks pass within this many bootstrap standard errors.
const SE_LIMIT: f64 = 3.0;
/// Floor on standard errors before dividing, to keep ratios finite.
const SE_FLOOR: f64 = 1e-12;
/// Block-bootstrap shape used by `verify`'s convergence check.
const BOOTSTRAP_BLOCKS: usize = 200;
const BOOTSTRAP_REPLICATES: usize = 200;

#[derive(Debug, Parser)]
#[command(
    name = "dirmi",
    version,
    about = "Dirichlet predictive-uncertainty toolkit: closed-form scores, \
             concentration estimation, Monte Carlo self-checks, and \
             active-learning benchmarks"
)]
pub struct Cli {
    /// Plain-text `key = value` defaults for the chosen subcommand
    /// (keys are the long flag names); explicit flags win on conflict.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Cap on worker threads for parallel sections (default: all cores;
    /// the DIRMI_THREADS environment variable is used when the flag is
    /// absent).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form uncertainty report for one Dirichlet concentration vector
    Score(ScoreArgs),
    /// Fit Dirichlet concentrations to simplex samples by fixed-point iteration
    Estimate(EstimateArgs),
    /// Run the analytic-vs-Monte-Carlo self-check suite over a concentration grid
    Verify(VerifyArgs),
    /// Pool-based active-learning benchmark; writes a learning-curve CSV
    AlRun(AlRunArgs),
    /// Aggregate a learning-curve CSV into per-strategy mean/std rows
    PlotData(PlotDataArgs),
}

#[derive(Debug, Args)]
struct ScoreArgs {
    /// Comma-separated strictly positive concentrations, e.g. "1,1"
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Also write the report as a one-row CSV (with header) to this file
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Headerless CSV of simplex rows, one sample per line
    #[arg(long, value_name = "PATH")]
    samples: Option<PathBuf>,
    /// Moment statistic: "log-of-mean" or "mean-of-logs"
    #[arg(long, value_name = "MODE")]
    statistic: Option<String>,
    /// Fixed-point sweep budget
    #[arg(long, value_name = "N")]
    max_iterations: Option<usize>,
    /// Convergence tolerance on the max per-coordinate update
    #[arg(long, value_name = "X")]
    tol: Option<f64>,
    /// Classes with both simplex moments below this are pinned to zero
    #[arg(long, value_name = "X")]
    degenerate_epsilon: Option<f64>,
    /// Polish every inverse-digamma evaluation with Newton steps
    #[arg(long)]
    refine: bool,
    /// Also print the closed-form uncertainty report of the fit
    #[arg(long)]
    report: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Comma-separated class counts for the check grid
    #[arg(long, value_name = "LIST")]
    classes: Option<String>,
    /// Comma-separated positive scales t; each contributes the symmetric
    /// point [t, ..., t] and the ramp point [t, 2t, ..., Ct]
    #[arg(long, value_name = "LIST")]
    alpha_grid: Option<String>,
    /// Monte Carlo draws per grid point
    #[arg(long, value_name = "N")]
    mc_samples: Option<usize>,
    /// Base seed for all sampling and bootstrapping
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
    /// Also write the report text to this file
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AlRunArgs {
    /// Data source: "synth", "mnist", or "emnist"
    #[arg(long, value_name = "NAME")]
    dataset: Option<String>,
    /// Comma-separated strategy ids (random, bald-empirical, bald-analytic,
    /// baba-empirical, baba-analytic)
    #[arg(long, value_name = "LIST")]
    strategies: Option<String>,
    /// Number of independent runs, using run seeds 0..N-1
    #[arg(long, value_name = "N")]
    seeds: Option<u64>,
    /// Items acquired per iteration
    #[arg(long, value_name = "K")]
    k: Option<usize>,
    /// Total labeling budget
    #[arg(long, value_name = "N")]
    k_tot: Option<usize>,
    /// Initial labeled-set size (default: the value of --k)
    #[arg(long, value_name = "N")]
    initial: Option<usize>,
    /// Stochastic forward passes per scored or evaluated item
    #[arg(long, value_name = "M")]
    m: Option<usize>,
    /// Pool size; larger datasets are subsampled down to this
    #[arg(long, value_name = "N")]
    pool: Option<usize>,
    /// Test-set size; larger test sets are subsampled down to this
    #[arg(long, value_name = "N")]
    test: Option<usize>,
    /// Seed for synthetic generation and subsampling (independent of the
    /// per-run seeds)
    #[arg(long, value_name = "SEED")]
    data_seed: Option<u64>,
    /// Synthetic data: number of classes
    #[arg(long, value_name = "C")]
    classes: Option<usize>,
    /// Synthetic data: feature dimension
    #[arg(long, value_name = "D")]
    dim: Option<usize>,
    /// Synthetic data: within-class standard deviation
    #[arg(long, value_name = "X")]
    spread: Option<f64>,
    /// IDX image file for the training pool (mnist/emnist)
    #[arg(long, value_name = "PATH")]
    train_images: Option<PathBuf>,
    /// IDX label file for the training pool (mnist/emnist)
    #[arg(long, value_name = "PATH")]
    train_labels: Option<PathBuf>,
    /// IDX image file for the test set (mnist/emnist)
    #[arg(long, value_name = "PATH")]
    test_images: Option<PathBuf>,
    /// IDX label file for the test set (mnist/emnist)
    #[arg(long, value_name = "PATH")]
    test_labels: Option<PathBuf>,
    /// Transpose each stored image (EMNIST distributions need this)
    #[arg(long)]
    transpose: bool,
    /// Hidden-layer width
    #[arg(long, value_name = "N")]
    hidden: Option<usize>,
    /// Dropout rate in [0, 1)
    #[arg(long, value_name = "RATE")]
    dropout: Option<f64>,
    /// Learning rate
    #[arg(long, value_name = "X")]
    lr: Option<f64>,
    /// Training epochs per retrain
    #[arg(long, value_name = "N")]
    epochs: Option<usize>,
    /// Minibatch size
    #[arg(long, value_name = "N")]
    batch_size: Option<usize>,
    /// Moment statistic for the concentration fit (default mean-of-logs)
    #[arg(long, value_name = "MODE")]
    statistic: Option<String>,
    /// Use the raw two-branch inverse digamma instead of Newton polish
    #[arg(long)]
    no_refine: bool,
    /// Fixed-point sweep budget for the concentration fit
    #[arg(long, value_name = "N")]
    max_iterations: Option<usize>,
    /// Convergence tolerance for the concentration fit
    #[arg(long, value_name = "X")]
    tol: Option<f64>,
    /// Degeneracy threshold for the concentration fit
    #[arg(long, value_name = "X")]
    degenerate_epsilon: Option<f64>,
    /// Learning-curve CSV output path
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Also write every per-item pool score to this CSV
    #[arg(long, value_name = "PATH")]
    dump_scores: Option<PathBuf>,
    /// Record real wall time per iteration (reruns then differ byte-wise)
    #[arg(long)]
    measure_time: bool,
}

#[derive(Debug, Args)]
struct PlotDataArgs {
    /// Learning-curve CSV produced by al-run
    #[arg(long, value_name = "PATH")]
    curves: Option<PathBuf>,
    /// Output CSV path (default: print to stdout)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

/// Parse arguments from the process command line, run the chosen command,
/// and return the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version go to stdout with success; genuine usage
            // errors share the parse-error exit code.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    let mut cfg = ConfigMap::load(cli.config.as_deref())?;
    let threads = cfg.resolve_opt::<usize>("threads", cli.threads)?;
    init_threads(threads)?;
    match cli.command {
        Command::Score(args) => cmd_score(args, cfg),
        Command::Estimate(args) => cmd_estimate(args, cfg),
        Command::Verify(args) => cmd_verify(args, cfg),
        Command::AlRun(args) => cmd_al_run(args, cfg),
        Command::PlotData(args) => cmd_plot_data(args, cfg),
    }
}

/// Cap the global worker pool. Precedence: flag, then DIRMI_THREADS, then
/// library default (all cores).
fn init_threads(flag: Option<usize>) -> Result<()> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("DIRMI_THREADS") {
            Ok(raw) => Some(parse_value::<usize>("DIRMI_THREADS", &raw)?),
            Err(_) => None,
        },
    };
    let Some(n) = n else { return Ok(()) };
    if n == 0 {
        return Err(Error::Domain("threads must be >= 1".into()));
    }
    // Only fails if a pool already exists (e.g. embedding `run` twice in
    // one process); the existing pool then stays, which is acceptable for
    // a cap.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

// ==================== config file ====================

/// `key = value` file contents merged under explicit flags. Every lookup
/// consumes its key so leftovers can be rejected at the end.
struct ConfigMap {
    values: BTreeMap<String, String>,
}

impl ConfigMap {
    fn load(path: Option<&Path>) -> Result<ConfigMap> {
        match path {
            None => Ok(ConfigMap {
                values: BTreeMap::new(),
            }),
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                    path: path.to_path_buf(),
                    source: e,
                })?;
                ConfigMap::parse(&text, &path.display().to_string())
            }
        }
    }

    /// One `key = value` pair per line; blank lines and `#` comments are
    /// skipped; duplicate keys are rejected.
    fn parse(text: &str, origin: &str) -> Result<ConfigMap> {
        let mut values = BTreeMap::new();
        for (index, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse(format!(
                    "{origin} line {}: expected `key = value`, got {line:?}",
                    index + 1
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(Error::Parse(format!(
                    "{origin} line {}: empty key",
                    index + 1
                )));
            }
            if values.insert(key.clone(), value).is_some() {
                return Err(Error::Parse(format!(
                    "{origin} line {}: duplicate key {key:?}",
                    index + 1
                )));
            }
        }
        Ok(ConfigMap { values })
    }

    fn take_parsed<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.remove(key) {
            None => Ok(None),
            Some(raw) => parse_value::<T>(&format!("config key {key:?}"), &raw).map(Some),
        }
    }

    /// Flag beats config beats default. The config key is consumed either
    /// way so `finish` only reports genuinely unknown keys.
    fn resolve<T: FromStr>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let from_config = self.take_parsed::<T>(key)?;
        Ok(flag.or(from_config).unwrap_or(default))
    }

    fn resolve_opt<T: FromStr>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        let from_config = self.take_parsed::<T>(key)?;
        Ok(flag.or(from_config))
    }

    /// Boolean switch: a given flag forces `flag_value`; otherwise the
    /// config value applies, then the default.
    fn resolve_switch(
        &mut self,
        key: &str,
        flag_given: bool,
        flag_value: bool,
        default: bool,
    ) -> Result<bool> {
        let from_config = self.take_parsed::<bool>(key)?;
        Ok(if flag_given {
            flag_value
        } else {
            from_config.unwrap_or(default)
        })
    }

    /// Reject any keys that no lookup consumed.
    fn finish(self) -> Result<()> {
        if self.values.is_empty() {
            Ok(())
        } else {
            let keys: Vec<String> = self.values.into_keys().collect();
            Err(Error::Parse(format!(
                "config file: unknown key(s): {}",
                keys.join(", ")
            )))
        }
    }
}

// ==================== parsing and formatting helpers ====================

fn parse_value<T: FromStr>(what: &str, raw: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.trim()
        .parse::<T>()
        .map_err(|e| Error::Parse(format!("{what}: cannot parse {raw:?}: {e}")))
}

fn parse_f64_list(what: &str, raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|item| parse_value::<f64>(what, item))
        .collect()
}

fn parse_usize_list(what: &str, raw: &str) -> Result<Vec<usize>> {
    raw.split(',')
        .map(|item| parse_value::<usize>(what, item))
        .collect()
}

fn parse_strategy_list(raw: &str) -> Result<Vec<AcquisitionStrategy>> {
    let strategies: Vec<AcquisitionStrategy> = raw
        .split(',')
        .map(|item| item.trim().parse::<AcquisitionStrategy>())
        .collect::<Result<_>>()?;
    for (i, s) in strategies.iter().enumerate() {
        if strategies[..i].contains(s) {
            return Err(Error::Parse(format!("strategies: duplicate entry {s}")));
        }
    }
    Ok(strategies)
}

/// Format with 12 significant digits, trailing zeros trimmed, switching to
/// scientific notation below 1e-4 or at 1e12 and above. Deterministic for
/// a given value, so report lines and CSV cells are byte-stable.
pub fn format_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (_, exp) = sci.split_once('e').expect("scientific float format");
    let exp: i32 = exp.parse().expect("float exponent");
    if !(-4..12).contains(&exp) {
        let (mantissa, _) = sci.split_once('e').expect("scientific float format");
        format!("{}e{exp}", trim_decimal(mantissa))
    } else {
        let precision = (11 - exp).max(0) as usize;
        trim_decimal(&format!("{x:.precision$}"))
    }
}

fn trim_decimal(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn format_alpha(alpha: &[f64]) -> String {
    let parts: Vec<String> = alpha.iter().map(|&a| format_sig(a)).collect();
    parts.join(",")
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

// ==================== score ====================

const SCORE_KEYS: [&str; 5] = [
    "predictive_entropy",
    "epistemic",
    "aleatoric",
    "mjent",
    "baba",
];

fn score_values(report: &UncertaintyReport) -> [f64; 5] {
    [
        report.predictive_entropy,
        report.mutual_information,
        report.aleatoric,
        report.mjent,
        report.baba,
    ]
}

fn score_lines(report: &UncertaintyReport) -> String {
    let mut text = String::new();
    for (key, value) in SCORE_KEYS.iter().zip(score_values(report)) {
        let _ = writeln!(text, "{key} = {}", format_sig(value));
    }
    text
}

fn cmd_score(args: ScoreArgs, mut cfg: ConfigMap) -> Result<i32> {
    let alpha_raw = cfg
        .resolve_opt::<String>("alpha", args.alpha)?
        .ok_or_else(|| {
            Error::Parse("score: --alpha is required (or `alpha` in the config file)".into())
        })?;
    let csv = cfg.resolve_opt::<PathBuf>("csv", args.csv)?;
    cfg.finish()?;

    let alpha = parse_f64_list("alpha", &alpha_raw)?;
    let params = DirichletParams::new(alpha)?;
    let report = UncertaintyReport::analytic(&params)?;
    print!("{}", score_lines(&report));
    if let Some(path) = csv {
        let values: Vec<String> = score_values(&report)
            .iter()
            .map(|&v| format_sig(v))
            .collect();
        let text = format!("{}\n{}\n", SCORE_KEYS.join(","), values.join(","));
        write_text(&path, &text)?;
    }
    Ok(0)
}

// ==================== estimate ====================

fn cmd_estimate(args: EstimateArgs, mut cfg: ConfigMap) -> Result<i32> {
    let defaults = EstimationConfig::default();
    let samples = cfg
        .resolve_opt::<PathBuf>("samples", args.samples)?
        .ok_or_else(|| {
            Error::Parse("estimate: --samples is required (or `samples` in the config file)".into())
        })?;
    let statistic_raw = cfg.resolve::<String>(
        "statistic",
        args.statistic,
        defaults.statistic_mode.to_string(),
    )?;
    let estimation = EstimationConfig {
        max_iterations: cfg.resolve("max-iterations", args.max_iterations, defaults.max_iterations)?,
        convergence_tol: cfg.resolve("tol", args.tol, defaults.convergence_tol)?,
        statistic_mode: statistic_raw.parse()?,
        degenerate_epsilon: cfg.resolve(
            "degenerate-epsilon",
            args.degenerate_epsilon,
            defaults.degenerate_epsilon,
        )?,
        refine_inverse_digamma: cfg.resolve_switch(
            "refine",
            args.refine,
            true,
            defaults.refine_inverse_digamma,
        )?,
    };
    let report = cfg.resolve_switch("report", args.report, true, false)?;
    cfg.finish()?;

    let batch = read_simplex_csv(&samples)?;
    let result = fixed_point_estimate(&batch, &estimation)?;
    println!("alpha = {}", format_alpha(result.params.alpha()));
    println!("iterations = {}", result.iterations);
    println!("converged = {}", result.converged);
    println!("statistic = {}", estimation.statistic_mode);
    if report {
        print!("{}", score_lines(&UncertaintyReport::analytic(&result.params)?));
    }
    Ok(0)
}

// ==================== verify ====================

struct GridPoint {
    alpha: Vec<f64>,
    label: String,
}

fn build_grid(classes: &[usize], scales: &[f64]) -> Vec<GridPoint> {
    let mut grid = Vec::new();
    for &c in classes {
        for &t in scales {
            grid.push(GridPoint {
                alpha: vec![t; c],
                label: format!("symmetric C={c} t={}", format_sig(t)),
            });
            grid.push(GridPoint {
                alpha: (1..=c).map(|i| t * i as f64).collect(),
                label: format!("ramp C={c} t={}", format_sig(t)),
            });
        }
    }
    grid
}

/// Per-grid-point deviations gathered by the check suite.
struct PointOutcome {
    label: String,
    decomposition_dev: f64,
    joint_dev: f64,
    moment_se_ratio: f64,
    bald_abs_dev: f64,
    bald_se_ratio: f64,
}

fn ln_floored(p: f64) -> f64 {
    p.max(1e-300).ln()
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn evaluate_point(point: &GridPoint, mc_samples: usize, seed: u64, index: u64) -> Result<PointOutcome> {
    let params = DirichletParams::new(point.alpha.clone())?;
    let report = UncertaintyReport::analytic(&params)?;
    let h = params.differential_entropy()?;
    let decomposition_dev =
        (report.predictive_entropy - report.mutual_information - report.aleatoric).abs();
    let joint_dev = (h + report.predictive_entropy
        - report.joint_entropy
        - report.mutual_information)
        .abs();

    // One shared MC batch per grid point feeds both sampling checks.
    let batch = params.sample(mc_samples, derive_seed(seed, 7, index))?;
    let mut moment_se_ratio: f64 = 0.0;
    for (i, j) in [(0usize, 0usize), (0, 1)] {
        let analytic = params.cross_moment(i, j)?;
        let values: Vec<f64> = batch
            .iter()
            .map(|pt| {
                let p = pt.probs();
                p[i] * ln_floored(p[j])
            })
            .collect();
        let (mean, se) = mean_and_se(&values);
        moment_se_ratio = moment_se_ratio.max((mean - analytic).abs() / se.max(SE_FLOOR));
    }
    let bald = empirical_bald(&batch);
    let se = bald_block_bootstrap_se(
        &batch,
        BOOTSTRAP_BLOCKS,
        BOOTSTRAP_REPLICATES,
        derive_seed(seed, 8, index),
    )?;
    let bald_abs_dev = (bald - report.mutual_information).abs();
    Ok(PointOutcome {
        label: point.label.clone(),
        decomposition_dev,
        joint_dev,
        moment_se_ratio,
        bald_abs_dev,
        bald_se_ratio: bald_abs_dev / se.max(SE_FLOOR),
    })
}

/// Largest value of `metric` over the grid, with the label where it occurs.
fn worst<'a>(points: &'a [PointOutcome], metric: impl Fn(&PointOutcome) -> f64) -> (f64, &'a str) {
    let mut value = f64::NEG_INFINITY;
    let mut label = "";
    for p in points {
        let v = metric(p);
        if v > value {
            value = v;
            label = &p.label;
        }
    }
    (value, label)
}

/// Exact uniform-binary moment anchors: for alpha = (1, 1),
/// E[P1 ln P1] = -1/4 and E[P1 ln P2] = -3/4.
fn moment_anchor_dev() -> Result<f64> {
    let uniform = DirichletParams::new(vec![1.0, 1.0])?;
    let own = (uniform.cross_moment(0, 0)? + 0.25).abs();
    let cross = (uniform.cross_moment(0, 1)? + 0.75).abs();
    Ok(own.max(cross))
}

/// Strict monotonicity along the symmetric ray [t; C]: epistemic decreasing
/// in t, aleatoric increasing. Returns the first violation description.
fn monotone_violation(classes: &[usize], scales: &[f64]) -> Result<Option<String>> {
    let mut ordered = scales.to_vec();
    ordered.sort_by(|a, b| a.partial_cmp(b).expect("finite scales"));
    ordered.dedup();
    for &c in classes {
        let mut previous: Option<(f64, f64, f64)> = None;
        for &t in &ordered {
            let report = UncertaintyReport::analytic(&DirichletParams::new(vec![t; c])?)?;
            if let Some((t0, mi0, al0)) = previous {
                if report.mutual_information >= mi0 {
                    return Ok(Some(format!(
                        "epistemic not decreasing for C={c} between t={} and t={}: {} -> {}",
                        format_sig(t0),
                        format_sig(t),
                        format_sig(mi0),
                        format_sig(report.mutual_information)
                    )));
                }
                if report.aleatoric <= al0 {
                    return Ok(Some(format!(
                        "aleatoric not increasing for C={c} between t={} and t={}: {} -> {}",
                        format_sig(t0),
                        format_sig(t),
                        format_sig(al0),
                        format_sig(report.aleatoric)
                    )));
                }
            }
            previous = Some((t, report.mutual_information, report.aleatoric));
        }
    }
    Ok(None)
}

fn cmd_verify(args: VerifyArgs, mut cfg: ConfigMap) -> Result<i32> {
    let classes_raw = cfg.resolve::<String>("classes", args.classes, "2,3,5".into())?;
    let grid_raw = cfg.resolve::<String>("alpha-grid", args.alpha_grid, "0.1,0.5,1,2,5,10".into())?;
    let mc_samples = cfg.resolve("mc-samples", args.mc_samples, 100_000)?;
    let seed = cfg.resolve("seed", args.seed, 0u64)?;
    let out = cfg.resolve_opt::<PathBuf>("out", args.out)?;
    cfg.finish()?;

    let classes = parse_usize_list("classes", &classes_raw)?;
    if classes.iter().any(|&c| c < 2) {
        return Err(Error::Domain("verify: class counts must be >= 2".into()));
    }
    let scales = parse_f64_list("alpha-grid", &grid_raw)?;
    if scales.iter().any(|&t| !t.is_finite() || t <= 0.0) {
        return Err(Error::Domain("verify: alpha-grid scales must be positive".into()));
    }
    if mc_samples < 2 {
        return Err(Error::Domain("verify: mc-samples must be >= 2".into()));
    }

    let grid = build_grid(&classes, &scales);
    let points: Vec<PointOutcome> = grid
        .par_iter()
        .enumerate()
        .map(|(i, p)| evaluate_point(p, mc_samples, seed, i as u64))
        .collect::<Result<_>>()?;

    let mut report = String::new();
    let _ = writeln!(
        report,
        "grid: {} points ({} class counts x {} scales x 2 shapes), {} MC draws per point, seed {}",
        grid.len(),
        classes.len(),
        scales.len(),
        mc_samples,
        seed
    );

    let mut failures: Vec<String> = Vec::new();
    let mut emit = |name: &str, pass: bool, detail: String, report: &mut String| {
        let verdict = if pass { "PASS" } else { "FAIL" };
        let _ = writeln!(report, "{verdict} {name}: {detail}");
        if !pass {
            failures.push(format!("{name}: {detail}"));
        }
    };

    let (dev, at) = worst(&points, |p| p.decomposition_dev);
    emit(
        "decomposition-identity",
        dev <= IDENTITY_TOL,
        format!(
            "max |H - epistemic - aleatoric| = {} at {at} (tol {})",
            format_sig(dev),
            format_sig(IDENTITY_TOL)
        ),
        &mut report,
    );

    let (dev, at) = worst(&points, |p| p.joint_dev);
    emit(
        "joint-entropy-identity",
        dev <= IDENTITY_TOL,
        format!(
            "max |h + H - joint - epistemic| = {} at {at} (tol {})",
            format_sig(dev),
            format_sig(IDENTITY_TOL)
        ),
        &mut report,
    );

    let anchor_dev = moment_anchor_dev()?;
    let (ratio, at) = worst(&points, |p| p.moment_se_ratio);
    emit(
        "moment-identities",
        anchor_dev <= ANCHOR_TOL && ratio <= SE_LIMIT,
        format!(
            "uniform-binary anchor dev = {} (tol {}); worst MC dev = {} x SE at {at} (limit {})",
            format_sig(anchor_dev),
            format_sig(ANCHOR_TOL),
            format_sig(ratio),
            format_sig(SE_LIMIT)
        ),
        &mut report,
    );

    let (ratio, at) = worst(&points, |p| p.bald_se_ratio);
    let (abs_dev, _) = worst(&points, |p| p.bald_abs_dev);
    emit(
        "empirical-bald",
        ratio <= SE_LIMIT,
        format!(
            "worst dev = {} x bootstrap SE at {at} (limit {}); max abs dev = {}",
            format_sig(ratio),
            format_sig(SE_LIMIT),
            format_sig(abs_dev)
        ),
        &mut report,
    );

    let violation = monotone_violation(&classes, &scales)?;
    emit(
        "monotone-trend",
        violation.is_none(),
        match violation {
            None => format!(
                "epistemic strictly decreasing and aleatoric strictly increasing along \
                 symmetric rays (classes [{}], {} scales)",
                classes
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(", "),
                scales.len()
            ),
            Some(v) => v,
        },
        &mut report,
    );

    let total = 5;
    let _ = writeln!(report, "verify: {}/{} checks passed", total - failures.len(), total);
    print!("{report}");
    if let Some(path) = out {
        write_text(&path, &report)?;
    }
    match failures.first() {
        None => Ok(0),
        Some(first) => Err(Error::Verification(format!(
            "{} of {total} checks failed; first: {first}",
            failures.len()
        ))),
    }
}

// ==================== al-run ====================

fn maybe_subsample(dataset: &LabeledDataset, n: usize, seed: u64) -> Result<LabeledDataset> {
    if n >= dataset.len() {
        Ok(dataset.clone())
    } else {
        subsample(dataset, n, seed)
    }
}

struct ResolvedAlRun {
    strategies: Vec<AcquisitionStrategy>,
    pool_set: LabeledDataset,
    test_set: LabeledDataset,
    config: ALConfig,
    out: PathBuf,
    dump_scores: Option<PathBuf>,
}

fn resolve_al_run(args: AlRunArgs, mut cfg: ConfigMap) -> Result<ResolvedAlRun> {
    let dataset_kind = cfg.resolve::<String>("dataset", args.dataset, "synth".into())?;
    let strategies_raw =
        cfg.resolve::<String>("strategies", args.strategies, "random,bald-analytic".into())?;
    let seeds_n = cfg.resolve("seeds", args.seeds, 3u64)?;
    let k = cfg.resolve("k", args.k, 20usize)?;
    let k_tot = cfg.resolve("k-tot", args.k_tot, 200usize)?;
    let initial = cfg.resolve_opt::<usize>("initial", args.initial)?.unwrap_or(k);
    let m = cfg.resolve("m", args.m, 50usize)?;
    let pool = cfg.resolve("pool", args.pool, 2000usize)?;
    let test = cfg.resolve("test", args.test, 1000usize)?;
    let data_seed = cfg.resolve("data-seed", args.data_seed, 0u64)?;
    let classes = cfg.resolve("classes", args.classes, 4usize)?;
    let dim = cfg.resolve("dim", args.dim, 2usize)?;
    let spread = cfg.resolve("spread", args.spread, 1.0f64)?;
    let train_images = cfg.resolve_opt::<PathBuf>("train-images", args.train_images)?;
    let train_labels = cfg.resolve_opt::<PathBuf>("train-labels", args.train_labels)?;
    let test_images = cfg.resolve_opt::<PathBuf>("test-images", args.test_images)?;
    let test_labels = cfg.resolve_opt::<PathBuf>("test-labels", args.test_labels)?;
    let transpose = cfg.resolve_switch("transpose", args.transpose, true, false)?;

    let model_defaults = ModelConfig::default();
    let model = ModelConfig {
        hidden_width: cfg.resolve("hidden", args.hidden, model_defaults.hidden_width)?,
        dropout_rate: cfg.resolve("dropout", args.dropout, model_defaults.dropout_rate)?,
        learning_rate: cfg.resolve("lr", args.lr, model_defaults.learning_rate)?,
        epochs: cfg.resolve("epochs", args.epochs, model_defaults.epochs)?,
        batch_size: cfg.resolve("batch-size", args.batch_size, model_defaults.batch_size)?,
        // overridden per retrain from the run seed
        seed: 0,
    };

    let est_defaults = EstimationConfig::default();
    let statistic_raw = cfg.resolve::<String>(
        "statistic",
        args.statistic,
        StatisticMode::MeanOfLogs.to_string(),
    )?;
    let estimation = EstimationConfig {
        max_iterations: cfg.resolve(
            "max-iterations",
            args.max_iterations,
            est_defaults.max_iterations,
        )?,
        convergence_tol: cfg.resolve("tol", args.tol, est_defaults.convergence_tol)?,
        statistic_mode: statistic_raw.parse()?,
        degenerate_epsilon: cfg.resolve(
            "degenerate-epsilon",
            args.degenerate_epsilon,
            est_defaults.degenerate_epsilon,
        )?,
        // the acquisition fit defaults looser initialization to the
        // polished inverse so recovered magnitudes are unbiased
        refine_inverse_digamma: cfg.resolve_switch("refine", args.no_refine, false, true)?,
    };

    let out = cfg.resolve("out", args.out, PathBuf::from("al-curves.csv"))?;
    let dump_scores = cfg.resolve_opt::<PathBuf>("dump-scores", args.dump_scores)?;
    let measure_time = cfg.resolve_switch("measure-time", args.measure_time, true, false)?;
    cfg.finish()?;

    let strategies = parse_strategy_list(&strategies_raw)?;
    if strategies.is_empty() {
        return Err(Error::Parse("al-run: empty strategy list".into()));
    }
    if seeds_n == 0 {
        return Err(Error::Domain("al-run: seeds must be >= 1".into()));
    }

    let (pool_set, test_set) = match dataset_kind.as_str() {
        "synth" => {
            if classes < 2 {
                return Err(Error::Domain("al-run: synth needs classes >= 2".into()));
            }
            let per_pool = pool.div_ceil(classes);
            let per_test = test.div_ceil(classes);
            let full_pool = synth_blobs(classes, per_pool, dim, spread, derive_seed(data_seed, 10, 0))?;
            let full_test = synth_blobs(classes, per_test, dim, spread, derive_seed(data_seed, 11, 0))?;
            (
                maybe_subsample(&full_pool, pool, derive_seed(data_seed, 12, 0))?,
                maybe_subsample(&full_test, test, derive_seed(data_seed, 13, 0))?,
            )
        }
        "mnist" | "emnist" => {
            let (Some(ti), Some(tl), Some(vi), Some(vl)) =
                (&train_images, &train_labels, &test_images, &test_labels)
            else {
                return Err(Error::Parse(format!(
                    "al-run: dataset {dataset_kind} needs --train-images, --train-labels, \
                     --test-images and --test-labels"
                )));
            };
            let full_pool = read_idx(ti, tl, transpose)?;
            let full_test = read_idx(vi, vl, transpose)?;
            (
                maybe_subsample(&full_pool, pool, derive_seed(data_seed, 12, 0))?,
                maybe_subsample(&full_test, test, derive_seed(data_seed, 13, 0))?,
            )
        }
        other => {
            return Err(Error::Parse(format!(
                "al-run: unknown dataset {other:?}; expected synth, mnist or emnist"
            )));
        }
    };

    Ok(ResolvedAlRun {
        strategies,
        pool_set,
        test_set,
        config: ALConfig {
            k,
            k_tot,
            m,
            initial_size: initial,
            seeds: (0..seeds_n).collect(),
            model,
            estimation,
            dump_scores: dump_scores.is_some(),
            measure_time,
        },
        out,
        dump_scores,
    })
}

fn cmd_al_run(args: AlRunArgs, cfg: ConfigMap) -> Result<i32> {
    let run = resolve_al_run(args, cfg)?;
    for &strategy in &run.strategies {
        run.config.validate(strategy, run.pool_set.len())?;
    }
    println!(
        "pool = {} items, {} classes, dim {}",
        run.pool_set.len(),
        run.pool_set.class_count(),
        run.pool_set.feature_dim()
    );
    println!("test = {} items", run.test_set.len());
    println!(
        "budget = initial {} + {} x {} = {}",
        run.config.initial_size,
        run.config.iterations(),
        run.config.k,
        run.config.k_tot
    );

    let mut curves: Vec<LearningCurveRecord> = Vec::new();
    let mut dumps: Vec<ScoreDumpRecord> = Vec::new();
    let mut fallback_total = 0usize;
    let mut abort: Option<(AcquisitionStrategy, RunAbort)> = None;
    for &strategy in &run.strategies {
        let result = run_active_learning(&run.pool_set, &run.test_set, &run.config, strategy)?;
        curves.extend(result.curves);
        dumps.extend(result.score_dumps);
        fallback_total += result.fallback_count;
        if let Some(a) = result.aborted {
            abort = Some((strategy, a));
            break;
        }
    }

    write_curves(&curves, &run.out)?;
    println!("curves = {}", run.out.display());
    if let Some(path) = &run.dump_scores {
        write_scores(&dumps, path)?;
        println!("scores = {}", path.display());
    }
    if fallback_total > 0 {
        println!("fallbacks = {fallback_total}");
    }
    for strategy in &run.strategies {
        let mut finals = Vec::new();
        for &seed in &run.config.seeds {
            let last = curves
                .iter()
                .filter(|r| r.strategy == strategy.id() && r.seed == seed)
                .max_by_key(|r| r.iteration);
            if let Some(record) = last {
                finals.push(record.test_accuracy);
            }
        }
        if !finals.is_empty() {
            let mean = finals.iter().sum::<f64>() / finals.len() as f64;
            println!("final_mean_accuracy {} = {}", strategy.id(), format_sig(mean));
        }
    }

    if let Some((strategy, a)) = abort {
        eprintln!(
            "al-run aborted: strategy {} seed {} iteration {}: {}",
            strategy.id(),
            a.seed,
            a.iteration,
            a.message
        );
        eprintln!("partial results kept in {}", run.out.display());
        return Ok(a.exit_code);
    }
    Ok(0)
}

// ==================== plot-data ====================

fn aggregate_curves(records: &[LearningCurveRecord]) -> String {
    let mut groups: BTreeMap<(String, usize), Vec<f64>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.strategy.clone(), r.labeled_count))
            .or_default()
            .push(r.test_accuracy);
    }
    let mut text = String::from("strategy,labeled_count,mean_accuracy,std_accuracy,runs\n");
    for ((strategy, labeled_count), accuracies) in &groups {
        let n = accuracies.len();
        let mean = accuracies.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (accuracies.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        let _ = writeln!(
            text,
            "{strategy},{labeled_count},{},{},{n}",
            format_sig(mean),
            format_sig(std)
        );
    }
    text
}

fn cmd_plot_data(args: PlotDataArgs, mut cfg: ConfigMap) -> Result<i32> {
    let curves = cfg
        .resolve_opt::<PathBuf>("curves", args.curves)?
        .ok_or_else(|| {
            Error::Parse("plot-data: --curves is required (or `curves` in the config file)".into())
        })?;
    let out = cfg.resolve_opt::<PathBuf>("out", args.out)?;
    cfg.finish()?;

    let records = read_curves(&curves)?;
    let text = aggregate_curves(&records);
    match out {
        Some(path) => write_text(&path, &text)?,
        None => print!("{text}"),
    }
    Ok(0)
}
