//! `pursuit-lab` command line.
//!
//! Exit codes: 0 success, 1 input error, 2 numerical failure (degenerate
//! dictionary).
//!
//! Matrix and vector files are plain text: a first line `rows cols`, then
//! the entries row by row, whitespace separated. A vector is a matrix with
//! one row or one column.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::benchlab::{
    self, emit_report, format_sig12, trial_log, Amplitude, BenchError, ConfigTemplate, GeneratorOptions, ReportFormat,
    SweepReport, SweepSpec, DEFAULT_EXACT_TOL,
};
use crate::linalg::{norm2, DenseMatrix, LinalgError};
use crate::pursuit::{pursue, CostKind, PursuitConfig, PursuitError, TerminationRule};
use crate::ripcert::{self, RipError};

pub const SEED_ENV: &str = "PURSUIT_LAB_SEED";
pub const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 2,
            _ => 1,
        }
    }
}

impl From<PursuitError> for CliError {
    fn from(e: PursuitError) -> Self {
        match e {
            PursuitError::AllColumnsDegenerate => CliError::Numerical(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Pursuit {
                source: PursuitError::AllColumnsDegenerate,
                ..
            } => CliError::Numerical(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<RipError> for CliError {
    fn from(e: RipError) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "pursuit-lab", version, about = "Tree-search matching pursuits for sparse recovery")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Recover a sparse vector from a matrix file and a measurement file.
    Recover(RecoverArgs),
    /// Run a paired Monte-Carlo sweep and write CSV and JSON reports.
    Bench(BenchArgs),
    /// Compute the restricted isometry constant of a matrix exhaustively.
    Rip(RipArgs),
    /// Print the two recovery-condition bounds on δ_{K+L}.
    Bounds(BoundsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgArg {
    Omp,
    MmpDf,
    MmpBf,
    Aomp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CostArg {
    /// Multiplicative model, horizon = K.
    Mul,
    /// Adaptive-multiplicative model, horizon = K_max.
    Amul,
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    /// Dictionary file (M x N).
    #[arg(long)]
    pub matrix: PathBuf,
    /// Measurement vector file (length M).
    #[arg(long)]
    pub signal: PathBuf,
    /// Where the length-N estimate is written.
    #[arg(long, default_value = "estimate.txt")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = AlgArg::Aomp)]
    pub alg: AlgArg,
    /// Stop at exactly K indices. Without it the residual rule (--eps, --kmax) applies.
    #[arg(long)]
    pub k: Option<usize>,
    /// Residual rule: stop once ‖r‖ < eps·‖y‖ [reference setting: 1e-6].
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    /// Residual rule: maximum support size [reference setting: 55].
    #[arg(long, default_value_t = 55)]
    pub kmax: usize,
    /// MMP branching factor L [reference setting: 6].
    #[arg(long, default_value_t = 6)]
    pub l: usize,
    /// MMP-BF survivors per level.
    #[arg(long, default_value_t = 6)]
    pub beam: usize,
    /// A*OMP initial paths I [reference setting: 3].
    #[arg(long, default_value_t = 3)]
    pub i: usize,
    /// A*OMP children per expansion B [reference setting: 2].
    #[arg(long, default_value_t = 2)]
    pub b: usize,
    /// Path budget for MMP-DF and A*OMP [reference setting: 200].
    #[arg(long, default_value_t = 200)]
    pub max_paths: usize,
    /// A*OMP cost model. Default: mul with --k, amul with the residual rule.
    #[arg(long, value_enum)]
    pub cost: Option<CostArg>,
    /// Cost model alpha. Default: 0.8 for mul, 0.97 for amul [reference settings].
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Reference Gaussian study: N=256 M=100 K=10:5:50, 500 trials, the four
    /// AOMP-K, AOMP-e, MMP-DF-K, MMP-DF-e configurations.
    #[arg(long, conflicts_with_all = ["n", "m", "k", "trials", "algs", "config"])]
    pub paper_defaults: bool,
    /// JSON sweep description; replaces every sweep flag.
    #[arg(long, conflicts_with_all = ["n", "m", "k", "trials", "algs", "exact_tol"])]
    pub config: Option<PathBuf>,
    /// Signal length N.
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    /// Measurement count M.
    #[arg(long, default_value_t = 100)]
    pub m: usize,
    /// Sparsity levels: a comma list (10,20,30) or a range start:step:end.
    #[arg(long, default_value = "10:5:50")]
    pub k: String,
    /// Trials per sparsity level.
    #[arg(long, default_value_t = 500)]
    pub trials: usize,
    /// Comma list of configuration labels: AOMP-K, AOMP-e, MMP-DF-K, MMP-DF-e,
    /// MMP-BF-K, MMP-BF-e, OMP-K, OMP-e.
    #[arg(long, default_value = "AOMP-K,AOMP-e,MMP-DF-K,MMP-DF-e")]
    pub algs: String,
    /// Global seed [default: $PURSUIT_LAB_SEED, else 7].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads. Reports do not depend on this value.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Exact recovery cutoff on ‖x − x̂‖/‖x‖.
    #[arg(long, default_value_t = DEFAULT_EXACT_TOL)]
    pub exact_tol: f64,
    /// Normalize dictionary columns to unit norm.
    #[arg(long)]
    pub normalize_columns: bool,
    /// Draw ±1 nonzeros instead of standard normal ones.
    #[arg(long)]
    pub flat_amplitude: bool,
    /// Directory receiving <prefix>.csv and <prefix>.json.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Report file name stem.
    #[arg(long, default_value = "report")]
    pub prefix: String,
    /// Also write one JSON line per trial to this file.
    #[arg(long)]
    pub trial_log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RipArgs {
    /// Matrix file.
    #[arg(long)]
    pub matrix: PathBuf,
    /// Subset size S = K + L.
    #[arg(long)]
    pub s: usize,
    /// Branching factor L used to split S into K + L for the bound check.
    #[arg(long, default_value_t = 1)]
    pub l: usize,
    /// Maximum number of subsets to enumerate.
    #[arg(long, default_value_t = 2_000_000)]
    pub cap: u128,
    /// Write the certificate JSON here as well.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub l: usize,
    /// Write the bound pair JSON here as well.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses the `rows cols` + row-major text format.
pub fn parse_matrix(text: &str) -> Result<DenseMatrix, CliError> {
    let mut tokens = text.split_whitespace();
    let mut dim = |what: &str| -> Result<usize, CliError> {
        let tok = tokens
            .next()
            .ok_or_else(|| CliError::Input(format!("missing {what} in header")))?;
        tok.parse()
            .map_err(|_| CliError::Input(format!("bad {what} '{tok}' in header")))
    };
    let rows = dim("row count")?;
    let cols = dim("column count")?;
    let values = tokens
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| CliError::Input(format!("bad number '{t}'")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() != rows * cols {
        return Err(CliError::Input(format!(
            "expected {} entries for a {rows}x{cols} matrix, found {}",
            rows * cols,
            values.len()
        )));
    }
    DenseMatrix::from_row_major(rows, cols, &values).map_err(|e: LinalgError| CliError::Input(e.to_string()))
}

pub fn parse_vector(text: &str) -> Result<Vec<f64>, CliError> {
    let m = parse_matrix(text)?;
    if m.rows() != 1 && m.cols() != 1 {
        return Err(CliError::Input(format!(
            "expected a vector, got a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    Ok(m.as_col_major().to_vec())
}

pub fn format_vector(v: &[f64]) -> String {
    let mut out = format!("{} 1\n", v.len());
    for x in v {
        out.push_str(&format!("{x:e}\n"));
    }
    out
}

fn recover(args: &RecoverArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let phi = parse_matrix(&read_text(&args.matrix)?)?;
    let y = parse_vector(&read_text(&args.signal)?)?;
    if y.len() != phi.rows() {
        return Err(CliError::Input(format!(
            "signal has {} entries, matrix has {} rows",
            y.len(),
            phi.rows()
        )));
    }
    let termination = match args.k {
        Some(k) => TerminationRule::SparsityK { k },
        None => TerminationRule::ResidualThreshold {
            epsilon_rel: args.eps,
            k_max: args.kmax,
        },
    };
    let cost = match (args.cost, args.k) {
        (Some(CostArg::Mul), _) | (None, Some(_)) => CostKind::Multiplicative,
        (Some(CostArg::Amul), _) | (None, None) => CostKind::AdaptiveMultiplicative,
    };
    let alpha = args.alpha.unwrap_or(match cost {
        CostKind::Multiplicative => 0.8,
        CostKind::AdaptiveMultiplicative => 0.97,
    });
    let config = match args.alg {
        AlgArg::Omp => PursuitConfig::omp(termination),
        AlgArg::MmpDf => PursuitConfig::mmp_df(args.l, args.max_paths, termination),
        AlgArg::MmpBf => PursuitConfig {
            max_paths: args.max_paths,
            ..PursuitConfig::mmp_bf(args.l, args.beam, termination)
        },
        AlgArg::Aomp => PursuitConfig::aomp(args.i, args.b, args.max_paths, cost, alpha, termination),
    };
    let result = pursue(&phi, &y, &config)?;
    write_text(&args.out, &format_vector(&result.estimate))?;
    let mut support = result.support.clone();
    support.sort_unstable();
    let support: Vec<String> = support.iter().map(|j| j.to_string()).collect();
    let rel = if norm2(&y) > 0.0 {
        result.residual_norm / norm2(&y)
    } else {
        0.0
    };
    writeln!(
        out,
        "support={{{}}} residual_norm={} relative_residual={} iterations={} explored_nodes={} paths_opened={} terminated_by={:?}",
        support.join(","),
        format_sig12(result.residual_norm),
        format_sig12(rel),
        result.iterations,
        result.explored_nodes,
        result.paths_opened,
        result.terminated_by,
    )
    .ok();
    Ok(())
}

/// `10,20,30` or `start:step:end` (inclusive).
pub fn parse_k_list(spec: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Input(format!("invalid value for `k`: '{spec}'"));
    let parts: Vec<&str> = spec.split(':').collect();
    let values: Vec<usize> = match parts.as_slice() {
        [start, step, end] => {
            let (start, step, end): (usize, usize, usize) = (
                start.trim().parse().map_err(|_| bad())?,
                step.trim().parse().map_err(|_| bad())?,
                end.trim().parse().map_err(|_| bad())?,
            );
            if step == 0 || start > end {
                return Err(bad());
            }
            (start..=end).step_by(step).collect()
        }
        [list] => list
            .split(',')
            .map(|t| t.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?,
        _ => return Err(bad()),
    };
    if values.is_empty() {
        return Err(bad());
    }
    Ok(values)
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("invalid value for `{SEED_ENV}`: '{v}'"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

pub fn bench_spec(args: &BenchArgs) -> Result<SweepSpec, CliError> {
    let seed = resolve_seed(args.seed)?;
    let mut spec = if let Some(path) = &args.config {
        let mut spec: SweepSpec = serde_json::from_str(&read_text(path)?)
            .map_err(|e| CliError::Input(format!("invalid config {}: {e}", path.display())))?;
        if args.seed.is_some() || std::env::var(SEED_ENV).is_ok() {
            spec.global_seed = seed;
        }
        spec
    } else if args.paper_defaults {
        SweepSpec::reference(seed)
    } else {
        let configs = args
            .algs
            .split(',')
            .map(|label| {
                ConfigTemplate::preset(label.trim())
                    .ok_or_else(|| CliError::Input(format!("invalid value for `algs`: unknown configuration '{label}'")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        SweepSpec {
            n: args.n,
            m: args.m,
            k_values: parse_k_list(&args.k)?,
            trials_per_k: args.trials,
            configs,
            global_seed: seed,
            exact_tol: args.exact_tol,
            generator: GeneratorOptions::default(),
        }
    };
    if args.normalize_columns {
        spec.generator.normalize_columns = true;
    }
    if args.flat_amplitude {
        spec.generator.amplitude = Amplitude::Flat;
    }
    if args.jobs == 0 {
        return Err(CliError::Input("invalid value for `jobs`: must be at least 1".into()));
    }
    spec.validate()?;
    Ok(spec)
}

pub fn summary_table(report: &SweepReport) -> String {
    let mut out = format!(
        "{:>4}  {:<10} {:>6} {:>10} {:>12} {:>12} {:>14} {:>12}\n",
        "K", "algorithm", "trials", "exact_rate", "anmse", "mean_iter", "mean_nodes", "mean_time_s"
    );
    for c in &report.cells {
        out.push_str(&format!(
            "{:>4}  {:<10} {:>6} {:>10.4} {:>12.4e} {:>12.2} {:>14.2} {:>12.3e}\n",
            c.k, c.algorithm, c.trials, c.exact_rate, c.anmse, c.mean_iterations, c.mean_explored_nodes, c.mean_wall_time_s
        ));
    }
    out
}

fn bench(args: &BenchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let spec = bench_spec(args)?;
    let report = benchlab::run_sweep(&spec, args.jobs)?;
    std::fs::create_dir_all(&args.out_dir).map_err(|source| CliError::Io {
        path: args.out_dir.clone(),
        source,
    })?;
    let csv_path = args.out_dir.join(format!("{}.csv", args.prefix));
    let json_path = args.out_dir.join(format!("{}.json", args.prefix));
    write_text(&csv_path, &emit_report(&report, ReportFormat::Csv)?)?;
    write_text(&json_path, &emit_report(&report, ReportFormat::Json)?)?;
    if let Some(path) = &args.trial_log {
        write_text(path, &trial_log(&report)?)?;
    }
    write!(out, "{}", summary_table(&report)).ok();
    writeln!(out, "wrote {} and {}", csv_path.display(), json_path.display()).ok();
    Ok(())
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn rip(args: &RipArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let phi = parse_matrix(&read_text(&args.matrix)?)?;
    if args.l == 0 || args.l >= args.s {
        return Err(CliError::Input(format!(
            "invalid value for `l`: need 1 <= L < S, got L={} S={}",
            args.l, args.s
        )));
    }
    let cert = ripcert::compute_ric_capped(&phi, args.s, args.cap)?;
    let bounds = ripcert::recovery_bounds(args.s - args.l, args.l)?;
    let json = serde_json::to_string_pretty(&cert).expect("certificate serializes");
    if let Some(path) = &args.out {
        write_text(path, &(json.clone() + "\n"))?;
    }
    writeln!(out, "{json}").ok();
    writeln!(out, "delta_{} = {}", args.s, format_sig12(cert.delta)).ok();
    writeln!(
        out,
        "loose bound sqrt(L)/(sqrt(K)+sqrt(L)) = {} (K={}, L={}): {}",
        format_sig12(bounds.bound_loose),
        bounds.k,
        bounds.l,
        pass(cert.delta < bounds.bound_loose)
    )
    .ok();
    writeln!(
        out,
        "tight bound sqrt(L)/(sqrt(K)+2sqrt(L)) = {} (K={}, L={}): {}",
        format_sig12(bounds.bound_tight),
        bounds.k,
        bounds.l,
        pass(cert.delta < bounds.bound_tight)
    )
    .ok();
    Ok(())
}

fn bounds(args: &BoundsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let b = ripcert::recovery_bounds(args.k, args.l)?;
    let json = serde_json::to_string_pretty(&b).expect("bounds serialize");
    if let Some(path) = &args.out {
        write_text(path, &(json + "\n"))?;
    }
    writeln!(out, "K={} L={}", b.k, b.l).ok();
    writeln!(out, "loose = {}", format_sig12(b.bound_loose)).ok();
    writeln!(out, "tight = {}", format_sig12(b.bound_tight)).ok();
    writeln!(out, "ordering loose > tight: {}", pass(b.bound_loose > b.bound_tight)).ok();
    Ok(())
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Recover(a) => recover(a, out),
        Command::Bench(a) => bench(a, out),
        Command::Rip(a) => rip(a, out),
        Command::Bounds(a) => bounds(a, out),
    }
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            if code == 0 {
                write!(out, "{rendered}").ok();
            } else {
                write!(err, "{rendered}").ok();
            }
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            writeln!(err, "error: {e}").ok();
            e.exit_code()
        }
    }
}
