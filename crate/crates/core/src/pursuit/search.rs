use crate::linalg::{correlate, DenseMatrix, IncrementalFactorization, LinalgError};

use super::{
    scatter_estimate, PursuitConfig, PursuitError, PursuitResult, SupportTrie, Termination, TerminationRule,
    TraceEntry,
};

pub(crate) enum Child {
    Node(IncrementalFactorization),
    Duplicate,
}

/// State shared by every search: the dictionary, the dedup trie and the
/// work counters.
pub(crate) struct SearchContext<'a> {
    pub phi: &'a DenseMatrix,
    pub rule: TerminationRule,
    pub trie: SupportTrie,
    pub explored_nodes: usize,
    tolerance: f64,
    trace: Option<Vec<TraceEntry>>,
}

impl<'a> SearchContext<'a> {
    pub fn new(phi: &'a DenseMatrix, y_norm: f64, config: &PursuitConfig) -> Self {
        Self {
            phi,
            rule: config.termination,
            trie: SupportTrie::new(),
            explored_nodes: 0,
            tolerance: config.termination.residual_tolerance() * y_norm,
            trace: config.record_trace.then(Vec::new),
        }
    }

    pub fn residual_met(&self, f: &IncrementalFactorization) -> bool {
        f.residual_norm() < self.tolerance
    }

    pub fn is_complete(&self, f: &IncrementalFactorization) -> bool {
        self.residual_met(f) || f.len() >= self.rule.max_len()
    }

    pub fn status(&self, f: &IncrementalFactorization) -> Termination {
        if self.residual_met(f) {
            Termination::ResidualMet
        } else if f.len() >= self.rule.max_len() {
            Termination::SparsityMet
        } else {
            Termination::PathBudgetExhausted
        }
    }

    /// Unselected columns by decreasing correlation with the residual, ties
    /// to the lower index.
    pub fn ranked_candidates(&self, f: &IncrementalFactorization) -> Vec<usize> {
        let corr = correlate(self.phi, f.residual()).expect("residual length matches the dictionary");
        let mut order: Vec<usize> = (0..self.phi.cols()).filter(|&j| !f.contains(j)).collect();
        order.sort_by(|&a, &b| corr[b].total_cmp(&corr[a]).then(a.cmp(&b)));
        order
    }

    pub fn extended_key(f: &IncrementalFactorization, j: usize) -> Vec<usize> {
        let mut key = f.support().to_vec();
        key.push(j);
        key
    }

    pub fn is_duplicate(&self, f: &IncrementalFactorization, j: usize) -> bool {
        self.trie.contains(&Self::extended_key(f, j))
    }

    /// Projects `f + {j}` unless that set was already seen. Degenerate
    /// columns come back as an error so the caller can skip them.
    pub fn try_child(&mut self, f: &IncrementalFactorization, j: usize) -> Result<Child, LinalgError> {
        if self.is_duplicate(f, j) {
            return Ok(Child::Duplicate);
        }
        let child = f.extended(self.phi, j)?;
        self.register(&child);
        Ok(Child::Node(child))
    }

    /// Records a freshly projected support.
    pub fn register(&mut self, f: &IncrementalFactorization) {
        self.trie.check_insert(f.support());
        self.explored_nodes += 1;
        let complete = self.is_complete(f);
        if let Some(trace) = self.trace.as_mut() {
            trace.push(TraceEntry {
                support: f.support().to_vec(),
                residual_norm: f.residual_norm(),
                complete,
            });
        }
    }

    /// The first `count` rank slots below `f`. Duplicates occupy a slot but
    /// are not returned; degenerate columns do not occupy a slot.
    pub fn top_children(&mut self, f: &IncrementalFactorization, count: usize) -> Vec<IncrementalFactorization> {
        let mut slots = 0;
        let mut out = Vec::with_capacity(count);
        for j in self.ranked_candidates(f) {
            if slots == count {
                break;
            }
            match self.try_child(f, j) {
                Ok(Child::Node(child)) => {
                    slots += 1;
                    out.push(child);
                }
                Ok(Child::Duplicate) => slots += 1,
                Err(LinalgError::DegenerateColumn(_)) => {}
                Err(e) => unreachable!("candidate list only holds valid unselected columns: {e}"),
            }
        }
        out
    }

    pub fn finish(
        self,
        winner: &IncrementalFactorization,
        iterations: usize,
        paths_opened: usize,
        terminated_by: Termination,
    ) -> Result<PursuitResult, PursuitError> {
        let coefficients = if winner.is_empty() {
            Vec::new()
        } else {
            winner.solve_coefficients()?
        };
        let estimate = scatter_estimate(winner.support(), &coefficients, self.phi.cols())?;
        Ok(PursuitResult {
            estimate,
            support: winner.support().to_vec(),
            coefficients,
            residual_norm: winner.residual_norm(),
            iterations,
            explored_nodes: self.explored_nodes,
            paths_opened,
            terminated_by,
            trace: self.trace.unwrap_or_default(),
        })
    }
}

/// Shared entry checks. Returns the root factorization, or a finished result
/// when `y` is zero.
pub(crate) fn start<'a>(
    phi: &'a DenseMatrix,
    y: &[f64],
    config: &PursuitConfig,
) -> Result<Result<(SearchContext<'a>, IncrementalFactorization), PursuitResult>, PursuitError> {
    config.validate()?;
    let root = IncrementalFactorization::new(phi, y)?;
    let ctx = SearchContext::new(phi, root.y_norm(), config);
    if root.y_norm() == 0.0 {
        return Ok(Err(ctx.finish(&root, 0, 0, Termination::ResidualMet)?));
    }
    Ok(Ok((ctx, root)))
}

/// Orders paths by residual, ties broken by the sorted support.
pub(crate) fn residual_order(a: &IncrementalFactorization, b: &IncrementalFactorization) -> std::cmp::Ordering {
    a.residual_norm()
        .total_cmp(&b.residual_norm())
        .then_with(|| sorted(a.support()).cmp(&sorted(b.support())))
}

pub(crate) fn sorted(support: &[usize]) -> Vec<usize> {
    let mut key = support.to_vec();
    key.sort_unstable();
    key
}
