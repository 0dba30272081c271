use crate::linalg::DenseMatrix;

use super::search::{residual_order, start};
use super::{Algorithm, PursuitConfig, PursuitError, PursuitResult};

/// Breadth-first multipath matching pursuit with leaf pruning.
///
/// Every surviving path spawns children on its top-L unselected columns; the
/// best `beam_width` children by residual survive into the next level. A set
/// reached by two parents keeps the first lineage.
pub fn run_mmp_bf(phi: &DenseMatrix, y: &[f64], config: &PursuitConfig) -> Result<PursuitResult, PursuitError> {
    if config.algorithm != Algorithm::MmpBf {
        return Err(PursuitError::InvalidConfig("run_mmp_bf needs algorithm = mmp-bf".into()));
    }
    let (mut ctx, root) = match start(phi, y, config)? {
        Ok(state) => state,
        Err(done) => return Ok(done),
    };
    let beam = config.beam_width.min(config.max_paths);
    let mut level = vec![root];
    let mut iterations = 0;
    let mut peak = 1;
    loop {
        let mut children = Vec::new();
        for parent in &level {
            if ctx.is_complete(parent) {
                continue;
            }
            children.extend(ctx.top_children(parent, config.branching));
        }
        if children.is_empty() {
            if iterations == 0 {
                return Err(PursuitError::AllColumnsDegenerate);
            }
            break;
        }
        iterations += 1;
        children.sort_by(residual_order);
        children.truncate(beam);
        peak = peak.max(children.len());
        level = children;
        // the first entry is the best; any met path stops the search
        if ctx.residual_met(&level[0]) || level.iter().all(|p| ctx.is_complete(p)) {
            break;
        }
    }
    let winner = level.swap_remove(0);
    let status = ctx.status(&winner);
    ctx.finish(&winner, iterations, peak, status)
}
