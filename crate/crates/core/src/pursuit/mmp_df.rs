//! Depth-first multipath matching pursuit.
//!
//! A path is identified by its branch choices `(c_1, ..., c_D)`: at level `d`
//! it takes the candidate ranked `c_d` among the columns most correlated with
//! its residual. Paths are visited in nondecreasing `Σ c_d`, ties broken
//! lexicographically, so the pure OMP path comes first and single deviations
//! come next. Tree nodes are memoized, which makes consecutive paths share
//! their common prefix the way backtracking would.

use crate::linalg::{DenseMatrix, IncrementalFactorization};

use super::search::{residual_order, start, SearchContext};
use super::{Algorithm, PursuitConfig, PursuitError, PursuitResult, Termination};

/// Upper bound on visited choice vectors, including those skipped as
/// duplicates. Only reached when nearly the whole tree collapses onto
/// already-seen supports.
const MAX_CHOICE_VECTORS: usize = 2_000_000;

/// Branch-choice vectors of length `depth` over `[0, branching)` in
/// nondecreasing sum, lexicographic within a sum.
#[derive(Debug, Clone)]
pub struct BranchChoices {
    current: Vec<usize>,
    branching: usize,
    started: bool,
    done: bool,
}

impl BranchChoices {
    pub fn new(depth: usize, branching: usize) -> Self {
        assert!(branching >= 1, "branching factor must be at least 1");
        Self {
            current: vec![0; depth],
            branching,
            started: false,
            done: false,
        }
    }

    pub fn current(&self) -> &[usize] {
        &self.current
    }

    fn max_entry(&self) -> usize {
        self.branching - 1
    }

    /// Lexicographically smallest vector with the given sum: mass packed at
    /// the end.
    fn fill_minimal(slots: &mut [usize], mut mass: usize, cap: usize) -> bool {
        for v in slots.iter_mut().rev() {
            let take = mass.min(cap);
            *v = take;
            mass -= take;
        }
        mass == 0
    }

    /// Moves to the next vector with the same sum whose entry at some
    /// position `<= limit` increases. Falls through to the next sum when the
    /// current one is exhausted.
    fn step(&mut self, limit: usize) -> bool {
        let cap = self.max_entry();
        let depth = self.current.len();
        let mut suffix: usize = self.current[limit.min(depth.saturating_sub(1)) + 1..].iter().sum();
        let mut i = limit.min(depth.saturating_sub(1)) + 1;
        while i > 0 {
            i -= 1;
            if self.current[i] < cap && suffix > 0 {
                self.current[i] += 1;
                let rest = suffix - 1;
                Self::fill_minimal(&mut self.current[i + 1..], rest, cap);
                return true;
            }
            suffix += self.current[i];
        }
        let sum: usize = self.current.iter().sum();
        Self::fill_minimal(&mut self.current, sum + 1, cap)
    }

    /// Skips every remaining vector that shares `current[..=level]`.
    pub fn skip_prefix(&mut self, level: usize) -> bool {
        if self.done {
            return false;
        }
        if !self.step(level) {
            self.done = true;
        }
        !self.done
    }

    /// Advances to the next vector; the first call yields the zero vector.
    pub fn advance(&mut self) -> bool {
        if self.done {
            return false;
        }
        if !self.started {
            self.started = true;
            return true;
        }
        let last = self.current.len().saturating_sub(1);
        if self.current.is_empty() || !self.step(last) {
            self.done = true;
        }
        !self.done
    }
}

impl Iterator for BranchChoices {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        self.advance().then(|| self.current.clone())
    }
}

enum Slot {
    Child(usize),
    /// Valid rank whose child has not been projected yet.
    Pending(usize),
    Duplicate,
}

struct TreeNode {
    state: IncrementalFactorization,
    ranked: Option<Vec<usize>>,
    cursor: usize,
    slots: Vec<Slot>,
}

impl TreeNode {
    fn new(state: IncrementalFactorization) -> Self {
        Self {
            state,
            ranked: None,
            cursor: 0,
            slots: Vec::new(),
        }
    }
}

struct Tree<'a> {
    ctx: SearchContext<'a>,
    nodes: Vec<TreeNode>,
}

impl Tree<'_> {
    fn materialize(&mut self, parent: usize, j: usize) -> Option<usize> {
        let child = self.nodes[parent].state.extended(self.ctx.phi, j).ok()?;
        self.ctx.register(&child);
        self.nodes.push(TreeNode::new(child));
        Some(self.nodes.len() - 1)
    }

    /// Child of `node` at rank `rank`, or `None` when that rank is a
    /// duplicate support or does not exist.
    fn child(&mut self, node: usize, rank: usize) -> Option<usize> {
        if self.nodes[node].ranked.is_none() {
            let ranked = self.ctx.ranked_candidates(&self.nodes[node].state);
            self.nodes[node].ranked = Some(ranked);
        }
        while self.nodes[node].slots.len() <= rank {
            let n = &mut self.nodes[node];
            let ranked = n.ranked.as_ref().expect("ranked above");
            let j = *ranked.get(n.cursor)?;
            n.cursor += 1;
            if self.ctx.is_duplicate(&self.nodes[node].state, j) {
                self.nodes[node].slots.push(Slot::Duplicate);
            } else if self.nodes[node].slots.len() == rank {
                if let Some(id) = self.materialize(node, j) {
                    self.nodes[node].slots.push(Slot::Child(id));
                }
            } else if !self.nodes[node].state.is_degenerate(self.ctx.phi, j) {
                self.nodes[node].slots.push(Slot::Pending(j));
            }
        }
        match self.nodes[node].slots[rank] {
            Slot::Child(id) => Some(id),
            Slot::Duplicate => None,
            Slot::Pending(j) => {
                let slot = if self.ctx.is_duplicate(&self.nodes[node].state, j) {
                    Slot::Duplicate
                } else {
                    match self.materialize(node, j) {
                        Some(id) => Slot::Child(id),
                        None => Slot::Duplicate,
                    }
                };
                let out = match slot {
                    Slot::Child(id) => Some(id),
                    _ => None,
                };
                self.nodes[node].slots[rank] = slot;
                out
            }
        }
    }
}

pub fn run_mmp_df(phi: &DenseMatrix, y: &[f64], config: &PursuitConfig) -> Result<PursuitResult, PursuitError> {
    if config.algorithm != Algorithm::MmpDf {
        return Err(PursuitError::InvalidConfig("run_mmp_df needs algorithm = mmp-df".into()));
    }
    let (ctx, root) = match start(phi, y, config)? {
        Ok(state) => state,
        Err(done) => return Ok(done),
    };
    let depth = ctx.rule.max_len();
    let mut tree = Tree {
        ctx,
        nodes: vec![TreeNode::new(root)],
    };
    let mut choices = BranchChoices::new(depth, config.branching);
    let mut best: Option<usize> = None;
    let mut paths = 0;
    let mut visits = 0;
    let mut more = choices.advance();
    while more && visits < MAX_CHOICE_VECTORS {
        visits += 1;
        let mut node = 0;
        let mut dead_at = None;
        for level in 0..depth {
            if tree.ctx.is_complete(&tree.nodes[node].state) {
                break;
            }
            match tree.child(node, choices.current()[level]) {
                Some(id) => node = id,
                None => {
                    dead_at = Some(level);
                    break;
                }
            }
        }
        if let Some(level) = dead_at {
            if level == 0 && node == 0 && tree.nodes[0].slots.is_empty() {
                return Err(PursuitError::AllColumnsDegenerate);
            }
            more = choices.skip_prefix(level);
            continue;
        }
        paths += 1;
        let leaf = &tree.nodes[node].state;
        if tree.ctx.residual_met(leaf) {
            let leaf = leaf.clone();
            let explored = tree.ctx.explored_nodes;
            return tree.ctx.finish(&leaf, explored, paths, Termination::ResidualMet);
        }
        let better = match best {
            None => true,
            Some(b) => residual_order(leaf, &tree.nodes[b].state).is_lt(),
        };
        if better {
            best = Some(node);
        }
        if paths == config.max_paths {
            break;
        }
        more = choices.advance();
    }
    let winner = match best {
        Some(b) => tree.nodes[b].state.clone(),
        // every path was cut short by duplicates or missing ranks
        None => tree.nodes[0].state.clone(),
    };
    let explored = tree.ctx.explored_nodes;
    tree.ctx.finish(&winner, explored, paths, Termination::PathBudgetExhausted)
}
