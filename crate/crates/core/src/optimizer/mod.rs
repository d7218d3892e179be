//! The BBKB loop, the GP-UCB / GP-BUCB / BKB baselines, the confidence
//! schedule, lazy UCB maximization and initialization helpers.

mod config;
mod exact_ucb;
mod init;
mod sparse;
mod trace;
mod ucb;

pub use config::{beta_from_log_sum, beta_schedule, BatchRule, OptimizerConfig, QBarMode};
pub use exact_ucb::{run_gp_bucb, run_gp_ucb};
pub use init::{uncertainty_sampling_init, warm_start_dictionary};
pub use sparse::{run_bbkb, run_bbkb_with, run_bkb, run_bkb_with, Init, ALGORITHM_STREAM};
pub use trace::{NoObserver, RunFailure, RunObserver, RunResult, RunTrace, StepRecord};
pub use ucb::{argmax, UcbCache};
