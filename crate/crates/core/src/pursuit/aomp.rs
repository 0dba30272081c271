use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::linalg::{DenseMatrix, IncrementalFactorization};

use super::search::{residual_order, sorted, start};
use super::{Algorithm, CostModel, PursuitConfig, PursuitError, PursuitResult, Termination};

/// Hard stop on best-first selections.
const MAX_SELECTIONS: usize = 50_000;

#[derive(Debug, Clone, PartialEq)]
struct OpenKey {
    cost: f64,
    support: Vec<usize>,
}

impl Eq for OpenKey {}

impl Ord for OpenKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then_with(|| self.support.cmp(&other.support))
    }
}

impl PartialOrd for OpenKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn keep_better(slot: &mut Option<IncrementalFactorization>, candidate: &IncrementalFactorization) {
    let replace = match slot {
        None => true,
        Some(current) => residual_order(candidate, current).is_lt(),
    };
    if replace {
        *slot = Some(candidate.clone());
    }
}

struct OpenSet {
    model: CostModel,
    paths: BTreeMap<OpenKey, IncrementalFactorization>,
    best_complete: Option<IncrementalFactorization>,
    best_any: Option<IncrementalFactorization>,
    peak: usize,
}

impl OpenSet {
    fn insert(&mut self, path: IncrementalFactorization, complete: bool) {
        if complete {
            keep_better(&mut self.best_complete, &path);
        }
        keep_better(&mut self.best_any, &path);
        let key = OpenKey {
            cost: self
                .model
                .cost(path.residual_norm(), path.previous_residual_norm(), path.len()),
            support: sorted(path.support()),
        };
        self.paths.insert(key, path);
    }

    /// Drops the most expensive paths until at most `budget` remain.
    fn prune(&mut self, budget: usize) {
        while self.paths.len() > budget {
            self.paths.pop_last();
        }
        self.peak = self.peak.max(self.paths.len());
    }
}

/// A*OMP: best-first search over partial supports.
///
/// The open set holds at most `max_paths` paths ordered by the cost model.
/// Each round pops the cheapest path; a complete path ends the search,
/// anything else is replaced by its top-B children. `iterations` counts
/// selections, `explored_nodes` counts projections.
pub fn run_aomp(phi: &DenseMatrix, y: &[f64], config: &PursuitConfig) -> Result<PursuitResult, PursuitError> {
    if config.algorithm != Algorithm::Aomp {
        return Err(PursuitError::InvalidConfig("run_aomp needs algorithm = aomp".into()));
    }
    let (mut ctx, root) = match start(phi, y, config)? {
        Ok(state) => state,
        Err(done) => return Ok(done),
    };
    let mut open = OpenSet {
        model: config.cost_model,
        paths: BTreeMap::new(),
        best_complete: None,
        best_any: None,
        peak: 0,
    };

    let initial = ctx.top_children(&root, config.initial_paths);
    if initial.is_empty() {
        return Err(PursuitError::AllColumnsDegenerate);
    }
    for path in initial {
        let complete = ctx.is_complete(&path);
        open.insert(path, complete);
    }
    open.prune(config.max_paths);

    let mut iterations = 0;
    while iterations < MAX_SELECTIONS {
        let Some((_, path)) = open.paths.pop_first() else {
            break;
        };
        iterations += 1;
        if ctx.is_complete(&path) {
            // a complete path pruned earlier may still beat the selected one
            let winner = match &open.best_complete {
                Some(b) if residual_order(b, &path).is_lt() => b.clone(),
                _ => path,
            };
            let status = ctx.status(&winner);
            return ctx.finish(&winner, iterations, open.peak, status);
        }
        for child in ctx.top_children(&path, config.expansion_branches) {
            let complete = ctx.is_complete(&child);
            open.insert(child, complete);
        }
        open.prune(config.max_paths);
    }
    let peak = open.peak;
    let winner = open
        .best_complete
        .or(open.best_any)
        .expect("at least one initial path was inserted");
    ctx.finish(&winner, iterations, peak, Termination::PathBudgetExhausted)
}
