use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::batching::{resparsify, GlobalAccumulator, LocalTracker};
use crate::bench::Oracle;
use crate::error::{invalid, Result};
use crate::kernels::KernelSpec;
use crate::points::PointSet;
use crate::sparse_gp::{BatchState, History};

use super::config::{BatchRule, BetaLog, OptimizerConfig};
use super::init::{history_from_arms, uncertainty_sampling_init, warm_start_dictionary};
use super::trace::{NoObserver, RunFailure, RunObserver, RunResult, RunTrace, StepRecord};
use super::ucb::UcbCache;

/// RNG stream used by the algorithms themselves (first pull, sampling).
pub const ALGORITHM_STREAM: u64 = 0;

/// How the first batch is formed.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Init {
    /// One uniformly drawn candidate.
    #[default]
    Uniform,
    /// Uncertainty sampling towards `min_parallelism`; the selected points
    /// form the first batch and count towards the horizon.
    UncertaintySampling,
    /// Pre-existing evaluations. They seed the model but are not part of
    /// the horizon or the trace.
    Warm { arms: Vec<usize>, feedback: Vec<f64> },
}

/// Accumulates run time with the clock stopped during oracle calls.
pub(crate) struct Stopwatch {
    total: Duration,
    started: Option<Instant>,
}

impl Stopwatch {
    pub(crate) fn start() -> Self {
        Stopwatch {
            total: Duration::ZERO,
            started: Some(Instant::now()),
        }
    }

    pub(crate) fn pause(&mut self) {
        if let Some(s) = self.started.take() {
            self.total += s.elapsed();
        }
    }

    pub(crate) fn resume(&mut self) {
        if self.started.is_none() {
            self.started = Some(Instant::now());
        }
    }

    pub(crate) fn nanos(&self) -> u64 {
        let live = self.started.map(|s| s.elapsed()).unwrap_or_default();
        (self.total + live).as_nanos() as u64
    }
}

pub(crate) fn algorithm_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(ALGORITHM_STREAM);
    rng
}

pub(crate) fn check_inputs(cfg: &OptimizerConfig, candidates: &PointSet, oracle: &dyn Oracle) -> Result<()> {
    cfg.validate()?;
    if candidates.is_empty() {
        return Err(invalid("candidate set is empty"));
    }
    if oracle.len() != candidates.len() {
        return Err(invalid(format!(
            "oracle covers {} candidates but {} were supplied",
            oracle.len(),
            candidates.len()
        )));
    }
    Ok(())
}

/// BBKB with a uniform first pull and no observer.
pub fn run_bbkb(cfg: &OptimizerConfig, kernel: &KernelSpec, candidates: &PointSet, oracle: &mut dyn Oracle) -> RunResult {
    run_bbkb_with(cfg, kernel, candidates, oracle, &Init::Uniform, &mut NoObserver)
}

pub fn run_bbkb_with(
    cfg: &OptimizerConfig,
    kernel: &KernelSpec,
    candidates: &PointSet,
    oracle: &mut dyn Oracle,
    init: &Init,
    observer: &mut dyn RunObserver,
) -> RunResult {
    let name = match cfg.rule {
        BatchRule::Global => "bbkb_global",
        BatchRule::GlobalLocal => "bbkb_global_local",
    };
    run_sparse(cfg, kernel, candidates, oracle, init, observer, name, false)
}

/// BKB: the same loop with the dictionary and feedback refreshed after
/// every selection.
pub fn run_bkb(cfg: &OptimizerConfig, kernel: &KernelSpec, candidates: &PointSet, oracle: &mut dyn Oracle) -> RunResult {
    run_bkb_with(cfg, kernel, candidates, oracle, &mut NoObserver)
}

pub fn run_bkb_with(
    cfg: &OptimizerConfig,
    kernel: &KernelSpec,
    candidates: &PointSet,
    oracle: &mut dyn Oracle,
    observer: &mut dyn RunObserver,
) -> RunResult {
    run_sparse(cfg, kernel, candidates, oracle, &Init::Uniform, observer, "bkb", true)
}

#[allow(clippy::too_many_arguments)]
fn run_sparse(
    cfg: &OptimizerConfig,
    kernel: &KernelSpec,
    candidates: &PointSet,
    oracle: &mut dyn Oracle,
    init: &Init,
    observer: &mut dyn RunObserver,
    name: &str,
    single: bool,
) -> RunResult {
    let mut trace = RunTrace::new(name, "", oracle.f_star());
    let mut run = SparseRun {
        cfg,
        kernel,
        candidates,
        single,
        trace: &mut trace,
        clock: Stopwatch::start(),
        oracle_calls: 0,
    };
    match run.execute(oracle, init, observer) {
        Ok(()) => Ok(trace),
        Err(error) => Err(RunFailure { error, partial: trace }),
    }
}

struct SparseRun<'a> {
    cfg: &'a OptimizerConfig,
    kernel: &'a KernelSpec,
    candidates: &'a PointSet,
    single: bool,
    trace: &'a mut RunTrace,
    clock: Stopwatch,
    oracle_calls: u64,
}

impl SparseRun<'_> {
    fn alpha_for(&self, beta: f64) -> f64 {
        if self.single {
            beta
        } else {
            self.cfg.c_tilde * beta
        }
    }

    fn evaluate(&mut self, oracle: &mut dyn Oracle, batch: &[usize]) -> Result<Vec<f64>> {
        self.clock.pause();
        let y = oracle.evaluate(batch);
        self.clock.resume();
        self.oracle_calls += 1;
        y
    }

    fn execute(&mut self, oracle: &mut dyn Oracle, init: &Init, observer: &mut dyn RunObserver) -> Result<()> {
        let cfg = self.cfg;
        check_inputs(cfg, self.candidates, oracle)?;
        let kernel = self.kernel;
        let cands = self.candidates;
        let a = cands.len();
        let horizon = cfg.horizon;
        let mut rng = algorithm_rng(cfg.seed);
        let mut beta_log = BetaLog::new(3.0);
        let mut selected = 0usize;
        let mut batch_id = 0usize;

        // First batch: its variances are the prior, k(x, x) / lambda.
        let (mut history, mut state) = match init {
            Init::Warm { arms, feedback } => {
                let history = history_from_arms(cands, arms, feedback)?;
                for &i in arms {
                    beta_log.push(kernel.diag(cands.row(i)) / cfg.lambda);
                }
                let q = cfg.q_bar.value(history.len(), cfg.delta, cfg.c_tilde);
                let alpha = self.alpha_for(beta_log.beta(cfg));
                let (_, state) =
                    warm_start_dictionary(kernel, cands, arms, feedback, cfg.lambda, q, alpha, &mut rng)?;
                (history, state)
            }
            _ => {
                let mut first = match init {
                    Init::UncertaintySampling => {
                        uncertainty_sampling_init(kernel, cands, cfg.min_parallelism, cfg.lambda)?
                    }
                    _ => Vec::new(),
                };
                if first.is_empty() {
                    first.push(rng.random_range(0..a));
                }
                first.truncate(horizon);
                let beta = beta_log.beta(cfg);
                let alpha = self.alpha_for(beta);
                let mut history = History::new(cands.dim());
                let mut acc = GlobalAccumulator::new();
                let mut prior = Vec::with_capacity(first.len());
                for &i in &first {
                    let v = kernel.diag(cands.row(i)) / cfg.lambda;
                    prior.push(v);
                    acc.update(v)?;
                    history.push(cands.row(i), Some(i))?;
                    selected += 1;
                    self.record(oracle, selected, i, batch_id, 0, acc.value(), beta, alpha, 0);
                }
                let y = self.evaluate(oracle, &first)?;
                history.close_batch(&y)?;
                for &v in &prior {
                    beta_log.push(v);
                }
                if selected >= horizon {
                    return Ok(());
                }
                let q = cfg.q_bar.value(history.len(), cfg.delta, cfg.c_tilde);
                let dict = resparsify(kernel, &history, &prior, q, &mut rng)?;
                let alpha = self.alpha_for(beta_log.beta(cfg));
                let state = BatchState::fit(kernel, dict, &history, cands, cfg.lambda, alpha)?;
                (history, state)
            }
        };

        let mut cache = UcbCache::new();
        let p = cfg.min_parallelism;
        while selected < horizon {
            batch_id += 1;
            observer.on_batch_start(&state, &history);
            let alpha = state.alpha();
            let beta = if self.single { alpha } else { alpha / cfg.c_tilde };
            cache.rebuild((0..a).map(|i| state.candidate_ucb(i)));
            let mut acc = GlobalAccumulator::new();
            let mut local: Option<LocalTracker> = None;
            let mut batch: Vec<usize> = Vec::new();
            loop {
                let before = cache.recomputations();
                let i = cache.select(|j| state.candidate_ucb(j))?;
                let v = state.candidate_start_var(i);
                history.push(cands.row(i), Some(i))?;
                batch.push(i);
                selected += 1;
                acc.update(v)?;
                let mut stop = if self.single {
                    true
                } else {
                    match cfg.rule {
                        BatchRule::Global => acc.should_terminate(cfg.c_tilde),
                        BatchRule::GlobalLocal => {
                            if let Some(l) = local.as_mut() {
                                l.update(&state.start_cov_column(i))?;
                                l.should_terminate(cfg.c_tilde)
                            } else if acc.should_terminate(cfg.c_tilde) {
                                if batch.len() < p {
                                    let mut l = LocalTracker::new(state.start_vars().to_vec());
                                    for &b in &batch {
                                        l.update(&state.start_cov_column(b))?;
                                    }
                                    let s = l.should_terminate(cfg.c_tilde);
                                    local = Some(l);
                                    s
                                } else {
                                    true
                                }
                            } else {
                                false
                            }
                        }
                    }
                };
                if selected >= horizon {
                    stop = true;
                }
                let acc_value = local.as_ref().map_or(acc.value(), |l| l.max_ratio());
                let rec = self.record(
                    oracle,
                    selected,
                    i,
                    batch_id,
                    state.dictionary().size(),
                    acc_value,
                    beta,
                    alpha,
                    cache.recomputations() - before,
                );
                observer.on_select(&rec, &state);
                if stop {
                    break;
                }
                state.rank_one_add_arm(i)?;
                cache.invalidate();
            }
            let y = self.evaluate(oracle, &batch)?;
            history.close_batch(&y)?;
            for &b in &batch {
                beta_log.push(state.candidate_start_var(b));
            }
            if selected >= horizon {
                break;
            }
            let vars_fb: Vec<f64> = history
                .arms()
                .iter()
                .map(|s| state.candidate_start_var(s.expect("every selection is a candidate")))
                .collect();
            let q = cfg.q_bar.value(history.len(), cfg.delta, cfg.c_tilde);
            let dict = resparsify(kernel, &history, &vars_fb, q, &mut rng)?;
            let alpha = self.alpha_for(beta_log.beta(cfg));
            state = BatchState::fit(kernel, dict, &history, cands, cfg.lambda, alpha)?;
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn record(
        &mut self,
        oracle: &dyn Oracle,
        step: usize,
        chosen_index: usize,
        batch_id: usize,
        dict_size: usize,
        accumulator: f64,
        beta: f64,
        alpha: f64,
        ucb_recomputations: u64,
    ) -> StepRecord {
        let rec = StepRecord {
            step,
            chosen_index,
            f_value: oracle.true_value(chosen_index),
            batch_id,
            dict_size,
            accumulator,
            beta,
            alpha,
            wall_nanos: self.clock.nanos(),
            ucb_recomputations,
            oracle_calls: self.oracle_calls,
        };
        self.trace.records.push(rec.clone());
        rec
    }
}
