//! Tree-search matching pursuits.
//!
//! All four algorithms grow supports one index at a time from the columns
//! most correlated with the current residual. They differ only in which
//! partial support is grown next:
//!
//! - [`run_omp`]: a single greedy path.
//! - [`run_mmp_df`]: complete paths one after another in a fixed order of
//!   branch choices, until one meets the residual rule or the path budget runs
//!   out.
//! - [`run_mmp_bf`]: level-synchronous beam search.
//! - [`run_aomp`]: best-first search ordered by a [`CostModel`].
//!
//! Every projected support is registered in a [`SupportTrie`], so a set
//! reached through two different selection orders is projected once.

mod aomp;
mod cost;
mod mmp_bf;
mod mmp_df;
mod omp;
mod search;
mod trie;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{DenseMatrix, LinalgError};

pub use aomp::run_aomp;
pub use cost::{path_cost, CostKind, CostModel};
pub use mmp_bf::run_mmp_bf;
pub use mmp_df::{run_mmp_df, BranchChoices};
pub use omp::run_omp;
pub use trie::SupportTrie;

/// Relative residual below which a `SparsityK` search stops early: the
/// measurement is already explained and further indices cannot help.
pub const SPARSITY_EXIT_REL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum PursuitError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("every candidate column is degenerate")]
    AllColumnsDegenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Omp,
    MmpDf,
    MmpBf,
    Aomp,
}

impl Algorithm {
    pub fn tag(&self) -> &'static str {
        match self {
            Algorithm::Omp => "OMP",
            Algorithm::MmpDf => "MMP-DF",
            Algorithm::MmpBf => "MMP-BF",
            Algorithm::Aomp => "AOMP",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum TerminationRule {
    /// Stop at exactly `k` indices (or earlier if the residual vanishes).
    SparsityK { k: usize },
    /// Stop once `‖r‖ < epsilon_rel · ‖y‖`, never exceeding `k_max` indices.
    ResidualThreshold { epsilon_rel: f64, k_max: usize },
}

impl TerminationRule {
    pub fn max_len(&self) -> usize {
        match *self {
            TerminationRule::SparsityK { k } => k,
            TerminationRule::ResidualThreshold { k_max, .. } => k_max,
        }
    }

    pub fn residual_tolerance(&self) -> f64 {
        match *self {
            TerminationRule::SparsityK { .. } => SPARSITY_EXIT_REL,
            TerminationRule::ResidualThreshold { epsilon_rel, .. } => epsilon_rel,
        }
    }

    pub fn validate(&self) -> Result<(), PursuitError> {
        match *self {
            TerminationRule::SparsityK { k: 0 } => {
                Err(PursuitError::InvalidConfig("k must be at least 1".into()))
            }
            TerminationRule::ResidualThreshold { epsilon_rel, k_max } => {
                if !(epsilon_rel > 0.0 && epsilon_rel < 1.0) {
                    return Err(PursuitError::InvalidConfig(format!(
                        "epsilon_rel must lie in (0, 1), got {epsilon_rel}"
                    )));
                }
                if k_max == 0 {
                    return Err(PursuitError::InvalidConfig("k_max must be at least 1".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Algorithm selector and every tuning knob. Fields that do not apply to the
/// selected algorithm are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PursuitConfig {
    pub algorithm: Algorithm,
    /// MMP branching factor L.
    pub branching: usize,
    /// MMP-BF survivors per level.
    pub beam_width: usize,
    /// A*OMP initial paths I.
    pub initial_paths: usize,
    /// A*OMP children per expansion B.
    pub expansion_branches: usize,
    pub max_paths: usize,
    pub cost_model: CostModel,
    pub termination: TerminationRule,
    /// Keep a log of every projected support in the result.
    #[serde(default)]
    pub record_trace: bool,
}

impl PursuitConfig {
    fn base(algorithm: Algorithm, termination: TerminationRule) -> Self {
        Self {
            algorithm,
            branching: 1,
            beam_width: 1,
            initial_paths: 1,
            expansion_branches: 1,
            max_paths: 1,
            cost_model: CostModel::new(CostKind::Multiplicative, 1.0, termination.max_len().max(1)),
            termination,
            record_trace: false,
        }
    }

    pub fn omp(termination: TerminationRule) -> Self {
        Self::base(Algorithm::Omp, termination)
    }

    pub fn mmp_df(branching: usize, max_paths: usize, termination: TerminationRule) -> Self {
        Self {
            branching,
            max_paths,
            ..Self::base(Algorithm::MmpDf, termination)
        }
    }

    pub fn mmp_bf(branching: usize, beam_width: usize, termination: TerminationRule) -> Self {
        Self {
            branching,
            beam_width,
            max_paths: beam_width,
            ..Self::base(Algorithm::MmpBf, termination)
        }
    }

    /// A*OMP with the cost horizon set to the termination rule's maximum
    /// support size.
    pub fn aomp(
        initial_paths: usize,
        expansion_branches: usize,
        max_paths: usize,
        cost: CostKind,
        alpha: f64,
        termination: TerminationRule,
    ) -> Self {
        Self {
            initial_paths,
            expansion_branches,
            max_paths,
            cost_model: CostModel::new(cost, alpha, termination.max_len()),
            ..Self::base(Algorithm::Aomp, termination)
        }
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }

    pub fn validate(&self) -> Result<(), PursuitError> {
        self.termination.validate()?;
        let positive = [
            ("branching", self.branching),
            ("beam_width", self.beam_width),
            ("initial_paths", self.initial_paths),
            ("expansion_branches", self.expansion_branches),
            ("max_paths", self.max_paths),
        ];
        for (name, value) in positive {
            if value == 0 {
                return Err(PursuitError::InvalidConfig(format!("{name} must be at least 1")));
            }
        }
        if self.algorithm == Algorithm::Aomp {
            if !self.cost_model.is_valid() {
                return Err(PursuitError::InvalidConfig(format!(
                    "cost model alpha must lie in (0, 1], got {}",
                    self.cost_model.alpha
                )));
            }
            if self.cost_model.target_length < self.termination.max_len() {
                return Err(PursuitError::InvalidConfig(
                    "cost model target_length is shorter than the maximum support size".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    ResidualMet,
    SparsityMet,
    PathBudgetExhausted,
}

/// One projected support, as logged when tracing is enabled.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    /// Indices in selection order.
    pub support: Vec<usize>,
    pub residual_norm: f64,
    /// The support satisfies the termination rule (a leaf of the search).
    pub complete: bool,
}

#[derive(Debug, Clone)]
pub struct PursuitResult {
    /// Length-N estimate, zero off the support.
    pub estimate: Vec<f64>,
    /// Winning support in selection order.
    pub support: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub explored_nodes: usize,
    pub paths_opened: usize,
    pub terminated_by: Termination,
    pub trace: Vec<TraceEntry>,
}

/// Runs whichever algorithm `config` selects.
pub fn pursue(phi: &DenseMatrix, y: &[f64], config: &PursuitConfig) -> Result<PursuitResult, PursuitError> {
    match config.algorithm {
        Algorithm::Omp => omp::run_omp_with(phi, y, config),
        Algorithm::MmpDf => run_mmp_df(phi, y, config),
        Algorithm::MmpBf => run_mmp_bf(phi, y, config),
        Algorithm::Aomp => run_aomp(phi, y, config),
    }
}

/// Places `coefficients` at the `support` positions of a length-`n` zero
/// vector.
pub fn scatter_estimate(support: &[usize], coefficients: &[f64], n: usize) -> Result<Vec<f64>, PursuitError> {
    if support.len() != coefficients.len() {
        return Err(LinalgError::DimensionMismatch {
            expected: support.len(),
            actual: coefficients.len(),
        }
        .into());
    }
    let mut out = vec![0.0; n];
    for (&j, &c) in support.iter().zip(coefficients) {
        if j >= n {
            return Err(LinalgError::ColumnOutOfRange { index: j, cols: n }.into());
        }
        out[j] = c;
    }
    Ok(out)
}
