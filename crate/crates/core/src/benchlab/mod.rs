//! Monte-Carlo recovery experiments on Gaussian sparse problems.
//!
//! A sweep draws `trials_per_k` problems for every sparsity level and feeds
//! the same problem to every configuration, so differences between
//! algorithms are paired. Each trial's seed is derived from the global seed,
//! the sparsity and the trial index alone; the report therefore does not
//! depend on how many worker threads ran the trials.

mod report;

use std::time::Instant;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{norm2, DenseMatrix};
use crate::pursuit::{pursue, Algorithm, CostKind, CostModel, PursuitConfig, PursuitError, TerminationRule};
use crate::ripcert::matrix_digest;

pub use report::{emit_report, format_sig12, trial_log, write_report, ReportFormat, CSV_HEADER};

/// Default exactness cutoff on `‖x − x̂‖ / ‖x‖`.
pub const DEFAULT_EXACT_TOL: f64 = 1e-2;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid value for `{key}`: {reason}")]
    InvalidConfig { key: String, reason: String },
    #[error("pursuit failed on problem seed {seed}: {source}")]
    Pursuit {
        seed: u64,
        #[source]
        source: PursuitError,
    },
    #[error("cannot average an empty list")]
    EmptyList,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

fn invalid(key: &str, reason: impl Into<String>) -> BenchError {
    BenchError::InvalidConfig {
        key: key.to_string(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Amplitude {
    /// i.i.d. standard normal nonzeros.
    #[default]
    Gaussian,
    /// Random ±1 nonzeros.
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorOptions {
    #[serde(default)]
    pub normalize_columns: bool,
    #[serde(default)]
    pub amplitude: Amplitude,
}

#[derive(Debug, Clone)]
pub struct SparseProblem {
    pub phi: DenseMatrix,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub k: usize,
    pub seed: u64,
}

/// Draws `Φ ∈ ℝ^{M×N}` with i.i.d. `N(0, 1/M)` entries and an exactly
/// `K`-sparse `x` on a uniformly random support, then sets `y = Φx`.
pub fn gen_problem(
    n: usize,
    m: usize,
    k: usize,
    seed: u64,
    options: &GeneratorOptions,
) -> Result<SparseProblem, BenchError> {
    if k == 0 {
        return Err(invalid("k", "sparsity must be at least 1"));
    }
    if !(n > m && m > k) {
        return Err(invalid("k", format!("dimension ordering N > M > K violated (N={n}, M={m}, K={k})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sd = 1.0 / (m as f64).sqrt();
    let mut data: Vec<f64> = (0..n * m)
        .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
        .collect();
    if options.normalize_columns {
        for col in data.chunks_mut(m) {
            let norm = norm2(col);
            if norm > 0.0 {
                col.iter_mut().for_each(|v| *v /= norm);
            }
        }
    }
    let phi = DenseMatrix::from_col_major(m, n, data).expect("finite Gaussian entries");
    let mut x = vec![0.0; n];
    for j in sample(&mut rng, n, k) {
        x[j] = loop {
            let v = match options.amplitude {
                Amplitude::Gaussian => rng.sample(StandardNormal),
                Amplitude::Flat => {
                    if rng.random_bool(0.5) {
                        1.0
                    } else {
                        -1.0
                    }
                }
            };
            // keep exactly K nonzeros
            if v != 0.0 {
                break v;
            }
        };
    }
    let y = phi.mul_vec(&x).expect("x has N entries");
    Ok(SparseProblem { phi, x, y, k, seed })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `trial` at sparsity `k`, independent of every other trial.
pub fn trial_seed(global_seed: u64, k: usize, trial: usize) -> u64 {
    let a = splitmix64(global_seed);
    let b = splitmix64(a ^ (k as u64));
    splitmix64(b ^ (trial as u64).rotate_left(32))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub seed: u64,
    #[serde(rename = "K")]
    pub k: usize,
    pub algorithm: String,
    pub nmse: f64,
    pub exact: bool,
    pub iterations: usize,
    pub explored_nodes: usize,
    pub wall_time_s: f64,
    /// Digest of the problem's Φ, identical across configs of one trial.
    pub matrix_digest: String,
}

pub fn nmse(x: &[f64], estimate: &[f64]) -> f64 {
    let err: f64 = x.iter().zip(estimate).map(|(a, b)| (a - b) * (a - b)).sum();
    err / x.iter().map(|a| a * a).sum::<f64>()
}

pub fn run_trial(
    problem: &SparseProblem,
    label: &str,
    config: &PursuitConfig,
    exact_tol: f64,
) -> Result<TrialResult, BenchError> {
    run_trial_with_digest(problem, label, config, exact_tol, matrix_digest(&problem.phi))
}

fn run_trial_with_digest(
    problem: &SparseProblem,
    label: &str,
    config: &PursuitConfig,
    exact_tol: f64,
    digest: String,
) -> Result<TrialResult, BenchError> {
    let started = Instant::now();
    let result = pursue(&problem.phi, &problem.y, config).map_err(|source| BenchError::Pursuit {
        seed: problem.seed,
        source,
    })?;
    let wall_time_s = started.elapsed().as_secs_f64();
    let nmse = nmse(&problem.x, &result.estimate);
    Ok(TrialResult {
        seed: problem.seed,
        k: problem.k,
        algorithm: label.to_string(),
        nmse,
        exact: nmse.sqrt() <= exact_tol,
        iterations: result.iterations,
        explored_nodes: result.explored_nodes,
        wall_time_s,
        matrix_digest: digest,
    })
}

/// Arithmetic mean of per-trial NMSE values.
pub fn anmse(values: &[f64]) -> Result<f64, BenchError> {
    if values.is_empty() {
        return Err(BenchError::EmptyList);
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum TerminationTemplate {
    /// Stop at the true sparsity of each problem.
    TrueSparsity,
    Sparsity { k: usize },
    Residual { epsilon_rel: f64, k_max: usize },
}

/// A pursuit configuration whose termination may depend on the sparsity of
/// the problem it is run on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigTemplate {
    pub label: String,
    pub algorithm: Algorithm,
    #[serde(default = "one")]
    pub branching: usize,
    #[serde(default = "one")]
    pub beam_width: usize,
    #[serde(default = "one")]
    pub initial_paths: usize,
    #[serde(default = "one")]
    pub expansion_branches: usize,
    #[serde(default = "one")]
    pub max_paths: usize,
    #[serde(default = "default_cost")]
    pub cost: CostKind,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub termination: TerminationTemplate,
}

fn one() -> usize {
    1
}

fn default_cost() -> CostKind {
    CostKind::Multiplicative
}

fn default_alpha() -> f64 {
    1.0
}

pub const EPSILON_REL: f64 = 1e-6;
pub const K_MAX: usize = 55;

impl ConfigTemplate {
    fn new(label: &str, algorithm: Algorithm, termination: TerminationTemplate) -> Self {
        Self {
            label: label.to_string(),
            algorithm,
            branching: 1,
            beam_width: 1,
            initial_paths: 1,
            expansion_branches: 1,
            max_paths: 1,
            cost: CostKind::Multiplicative,
            alpha: 1.0,
            termination,
        }
    }

    fn residual() -> TerminationTemplate {
        TerminationTemplate::Residual {
            epsilon_rel: EPSILON_REL,
            k_max: K_MAX,
        }
    }

    /// A*OMP stopped at the true K: I = 3, B = 2, 200 paths, multiplicative
    /// cost with α = 0.8.
    pub fn aomp_k() -> Self {
        Self {
            initial_paths: 3,
            expansion_branches: 2,
            max_paths: 200,
            cost: CostKind::Multiplicative,
            alpha: 0.8,
            ..Self::new("AOMP-K", Algorithm::Aomp, TerminationTemplate::TrueSparsity)
        }
    }

    /// A*OMP stopped on `‖r‖ < 1e-6 ‖y‖` with at most 55 indices,
    /// adaptive-multiplicative cost with α = 0.97.
    pub fn aomp_e() -> Self {
        Self {
            initial_paths: 3,
            expansion_branches: 2,
            max_paths: 200,
            cost: CostKind::AdaptiveMultiplicative,
            alpha: 0.97,
            ..Self::new("AOMP-e", Algorithm::Aomp, Self::residual())
        }
    }

    /// MMP-DF with L = 6 and 200 paths, stopped at the true K.
    pub fn mmp_df_k() -> Self {
        Self {
            branching: 6,
            max_paths: 200,
            ..Self::new("MMP-DF-K", Algorithm::MmpDf, TerminationTemplate::TrueSparsity)
        }
    }

    pub fn mmp_df_e() -> Self {
        Self {
            branching: 6,
            max_paths: 200,
            ..Self::new("MMP-DF-e", Algorithm::MmpDf, Self::residual())
        }
    }

    pub fn mmp_bf_k() -> Self {
        Self {
            branching: 6,
            beam_width: 6,
            max_paths: 200,
            ..Self::new("MMP-BF-K", Algorithm::MmpBf, TerminationTemplate::TrueSparsity)
        }
    }

    pub fn mmp_bf_e() -> Self {
        Self {
            branching: 6,
            beam_width: 6,
            max_paths: 200,
            ..Self::new("MMP-BF-e", Algorithm::MmpBf, Self::residual())
        }
    }

    pub fn omp_k() -> Self {
        Self::new("OMP-K", Algorithm::Omp, TerminationTemplate::TrueSparsity)
    }

    pub fn omp_e() -> Self {
        Self::new("OMP-e", Algorithm::Omp, Self::residual())
    }

    /// The four configurations of the reference Gaussian study.
    pub fn reference_set() -> Vec<Self> {
        vec![Self::aomp_k(), Self::aomp_e(), Self::mmp_df_k(), Self::mmp_df_e()]
    }

    /// Every preset, looked up by label (case-insensitive).
    pub fn preset(label: &str) -> Option<Self> {
        [
            Self::aomp_k(),
            Self::aomp_e(),
            Self::mmp_df_k(),
            Self::mmp_df_e(),
            Self::mmp_bf_k(),
            Self::mmp_bf_e(),
            Self::omp_k(),
            Self::omp_e(),
        ]
        .into_iter()
        .find(|c| c.label.eq_ignore_ascii_case(label))
    }

    pub fn resolve(&self, true_k: usize) -> PursuitConfig {
        let termination = match self.termination {
            TerminationTemplate::TrueSparsity => TerminationRule::SparsityK { k: true_k },
            TerminationTemplate::Sparsity { k } => TerminationRule::SparsityK { k },
            TerminationTemplate::Residual { epsilon_rel, k_max } => {
                TerminationRule::ResidualThreshold { epsilon_rel, k_max }
            }
        };
        PursuitConfig {
            algorithm: self.algorithm,
            branching: self.branching,
            beam_width: self.beam_width,
            initial_paths: self.initial_paths,
            expansion_branches: self.expansion_branches,
            max_paths: self.max_paths,
            cost_model: CostModel::new(self.cost, self.alpha, termination.max_len()),
            termination,
            record_trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub n: usize,
    pub m: usize,
    pub k_values: Vec<usize>,
    pub trials_per_k: usize,
    pub configs: Vec<ConfigTemplate>,
    pub global_seed: u64,
    #[serde(default = "default_exact_tol")]
    pub exact_tol: f64,
    #[serde(default)]
    pub generator: GeneratorOptions,
}

fn default_exact_tol() -> f64 {
    DEFAULT_EXACT_TOL
}

impl SweepSpec {
    /// N = 256, M = 100, K = 10, 15, ..., 50, 500 trials, the four reference
    /// configurations.
    pub fn reference(global_seed: u64) -> Self {
        Self {
            n: 256,
            m: 100,
            k_values: (10..=50).step_by(5).collect(),
            trials_per_k: 500,
            configs: ConfigTemplate::reference_set(),
            global_seed,
            exact_tol: DEFAULT_EXACT_TOL,
            generator: GeneratorOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.k_values.is_empty() {
            return Err(invalid("k_values", "at least one sparsity level is required"));
        }
        if self.configs.is_empty() {
            return Err(invalid("configs", "at least one configuration is required"));
        }
        if self.trials_per_k == 0 {
            return Err(invalid("trials_per_k", "must be at least 1"));
        }
        if !(self.n > self.m) {
            return Err(invalid("m", format!("need N > M, got N={} M={}", self.n, self.m)));
        }
        if let Some(&k) = self.k_values.iter().find(|&&k| k == 0 || k >= self.m) {
            return Err(invalid("k_values", format!("need M > K >= 1, got K={k} with M={}", self.m)));
        }
        if self.exact_tol.is_nan() || self.exact_tol <= 0.0 {
            return Err(invalid("exact_tol", "must be positive"));
        }
        for c in &self.configs {
            c.resolve(self.k_values[0])
                .validate()
                .map_err(|e| invalid("configs", format!("{}: {e}", c.label)))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    #[serde(rename = "K")]
    pub k: usize,
    pub algorithm: String,
    pub trials: usize,
    pub exact_rate: f64,
    pub anmse: f64,
    pub mean_iterations: f64,
    pub mean_explored_nodes: f64,
    pub mean_wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub global_seed: u64,
    pub config: SweepSpec,
    pub cells: Vec<CellSummary>,
    #[serde(skip)]
    pub trials: Vec<TrialResult>,
}

impl SweepReport {
    pub fn cell(&self, k: usize, label: &str) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.k == k && c.algorithm == label)
    }
}

fn summarize(k: usize, label: &str, trials: &[&TrialResult]) -> Result<CellSummary, BenchError> {
    let count = trials.len() as f64;
    let mean = |f: &dyn Fn(&TrialResult) -> f64| trials.iter().map(|t| f(t)).sum::<f64>() / count;
    let nmse: Vec<f64> = trials.iter().map(|t| t.nmse).collect();
    Ok(CellSummary {
        k,
        algorithm: label.to_string(),
        trials: trials.len(),
        exact_rate: trials.iter().filter(|t| t.exact).count() as f64 / count,
        anmse: anmse(&nmse)?,
        mean_iterations: mean(&|t| t.iterations as f64),
        mean_explored_nodes: mean(&|t| t.explored_nodes as f64),
        mean_wall_time_s: mean(&|t| t.wall_time_s),
    })
}

/// Runs every configuration on the same problems and aggregates per
/// `(K, configuration)` cell. `jobs` worker threads share the trials.
pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> Result<SweepReport, BenchError> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| BenchError::ThreadPool(e.to_string()))?;
    let jobs_list: Vec<(usize, usize)> = spec
        .k_values
        .iter()
        .flat_map(|&k| (0..spec.trials_per_k).map(move |t| (k, t)))
        .collect();
    let per_trial: Vec<Vec<TrialResult>> = pool.install(|| {
        jobs_list
            .par_iter()
            .map(|&(k, t)| {
                let seed = trial_seed(spec.global_seed, k, t);
                let problem = gen_problem(spec.n, spec.m, k, seed, &spec.generator)?;
                let digest = matrix_digest(&problem.phi);
                spec.configs
                    .iter()
                    .map(|c| run_trial_with_digest(&problem, &c.label, &c.resolve(k), spec.exact_tol, digest.clone()))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    let trials: Vec<TrialResult> = per_trial.into_iter().flatten().collect();
    let mut cells = Vec::new();
    for &k in &spec.k_values {
        for c in &spec.configs {
            let group: Vec<&TrialResult> = trials.iter().filter(|t| t.k == k && t.algorithm == c.label).collect();
            cells.push(summarize(k, &c.label, &group)?);
        }
    }
    Ok(SweepReport {
        schema_version: SCHEMA_VERSION,
        global_seed: spec.global_seed,
        config: spec.clone(),
        cells,
        trials,
    })
}
