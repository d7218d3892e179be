use std::fmt;

use crate::error::BbkbError;
use crate::sparse_gp::{BatchState, History};

/// One selection.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// 1-based step number.
    pub step: usize,
    pub chosen_index: usize,
    /// Noiseless objective value of the chosen candidate.
    pub f_value: f64,
    pub batch_id: usize,
    pub dict_size: usize,
    /// Termination accumulator after this step was admitted.
    pub accumulator: f64,
    pub beta: f64,
    pub alpha: f64,
    /// Cumulative selection time since the run started, oracle excluded.
    pub wall_nanos: u64,
    pub ucb_recomputations: u64,
    /// Oracle calls completed before this step was selected.
    pub oracle_calls: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub algorithm: String,
    pub dataset: String,
    pub f_star: f64,
    pub records: Vec<StepRecord>,
}

impl RunTrace {
    pub fn new(algorithm: impl Into<String>, dataset: impl Into<String>, f_star: f64) -> Self {
        RunTrace {
            algorithm: algorithm.into(),
            dataset: dataset.into(),
            f_star,
            records: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn choices(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.chosen_index).collect()
    }

    /// Sizes of consecutive batches, in order.
    pub fn batch_sizes(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = Vec::new();
        let mut last = None;
        for r in &self.records {
            if last == Some(r.batch_id) {
                *sizes.last_mut().expect("batch already open") += 1;
            } else {
                sizes.push(1);
                last = Some(r.batch_id);
            }
        }
        sizes
    }

    pub fn batch_count(&self) -> usize {
        self.batch_sizes().len()
    }
}

/// A run that stopped early, with everything recorded up to the failure.
#[derive(Debug)]
pub struct RunFailure {
    pub error: BbkbError,
    pub partial: RunTrace,
}

impl fmt::Display for RunFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "run aborted after {} steps: {}", self.partial.len(), self.error)
    }
}

impl std::error::Error for RunFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl From<RunFailure> for BbkbError {
    fn from(f: RunFailure) -> Self {
        f.error
    }
}

pub type RunResult = std::result::Result<RunTrace, RunFailure>;

/// Hooks into the sparse run loop. All methods default to no-ops.
pub trait RunObserver {
    /// Called after every refit, i.e. at the start of each batch, once the
    /// batch's feedback has been folded in and the dictionary resampled.
    fn on_batch_start(&mut self, _state: &BatchState, _history: &History) {}

    /// Called after each selection with the state before its rank-one
    /// update.
    fn on_select(&mut self, _record: &StepRecord, _state: &BatchState) {}
}

/// Observer that ignores everything.
pub struct NoObserver;

impl RunObserver for NoObserver {}
