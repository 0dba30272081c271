//! Sparse recovery with tree-search matching pursuits.
//!
//! - [`linalg`]: dense kernels and the incremental QR factorization.
//! - [`pursuit`]: OMP, MMP-DF, MMP-BF and A*OMP.
//! - [`ripcert`]: exhaustive restricted isometry constants and the
//!   recovery-condition bounds they are checked against.
//! - [`benchlab`]: Gaussian problem generation, paired Monte-Carlo sweeps and
//!   CSV/JSON reports.
//! - [`cli`]: the `pursuit-lab` command line.

pub mod benchlab;
pub mod cli;
pub mod linalg;
pub mod pursuit;
pub mod ripcert;
