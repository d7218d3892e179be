//! Batched budgeted kernel bandits.
//!
//! [`optimizer::run_bbkb`] is the main entry point; the exact baselines
//! (GP-UCB, GP-BUCB) and BKB share its trace format so [`bench`] can
//! compare them.

pub mod batching;
pub mod bench;
pub mod error;
pub mod kernels;
pub mod optimizer;
pub mod points;
pub mod sparse_gp;

pub use error::{BbkbError, Result};
pub use kernels::{KernelFamily, KernelSpec};
pub use points::PointSet;
