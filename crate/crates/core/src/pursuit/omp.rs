use crate::linalg::{DenseMatrix, LinalgError};

use super::search::{start, Child};
use super::{Algorithm, PursuitConfig, PursuitError, PursuitResult, Termination, TerminationRule};

/// Orthogonal matching pursuit: one greedy index per iteration.
pub fn run_omp(phi: &DenseMatrix, y: &[f64], termination: TerminationRule) -> Result<PursuitResult, PursuitError> {
    run_omp_with(phi, y, &PursuitConfig::omp(termination))
}

pub(crate) fn run_omp_with(
    phi: &DenseMatrix,
    y: &[f64],
    config: &PursuitConfig,
) -> Result<PursuitResult, PursuitError> {
    if config.algorithm != Algorithm::Omp {
        return Err(PursuitError::InvalidConfig("run_omp needs algorithm = omp".into()));
    }
    let (mut ctx, mut path) = match start(phi, y, config)? {
        Ok(state) => state,
        Err(done) => return Ok(done),
    };
    let mut iterations = 0;
    while !ctx.is_complete(&path) {
        let mut next = None;
        for j in ctx.ranked_candidates(&path) {
            match ctx.try_child(&path, j) {
                Ok(Child::Node(child)) => {
                    next = Some(child);
                    break;
                }
                // a single path never revisits a set
                Ok(Child::Duplicate) => unreachable!(),
                Err(LinalgError::DegenerateColumn(_)) => continue,
                Err(e) => return Err(e.into()),
            }
        }
        match next {
            Some(child) => {
                path = child;
                iterations += 1;
            }
            None if path.is_empty() => return Err(PursuitError::AllColumnsDegenerate),
            None => {
                return ctx.finish(&path, iterations, 1, Termination::PathBudgetExhausted);
            }
        }
    }
    let status = ctx.status(&path);
    ctx.finish(&path, iterations, 1, status)
}
