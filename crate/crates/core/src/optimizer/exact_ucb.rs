use rand::Rng;

use crate::batching::ProductAccumulator;
use crate::bench::Oracle;
use crate::error::Result;
use crate::kernels::KernelSpec;
use crate::points::PointSet;
use crate::sparse_gp::ExactCandidateGp;

use super::config::{BetaLog, OptimizerConfig};
use super::sparse::{algorithm_rng, check_inputs, Stopwatch};
use super::trace::{RunFailure, RunResult, RunTrace, StepRecord};
use super::ucb::argmax;

/// Sequential GP-UCB on exact posteriors.
pub fn run_gp_ucb(cfg: &OptimizerConfig, kernel: &KernelSpec, candidates: &PointSet, oracle: &mut dyn Oracle) -> RunResult {
    run_exact(cfg, kernel, candidates, oracle, 1.0, "gp_ucb")
}

/// GP-BUCB: exact posteriors, mean frozen within a batch, and batches
/// closed by the product rule with threshold `cfg.c_tilde`.
pub fn run_gp_bucb(cfg: &OptimizerConfig, kernel: &KernelSpec, candidates: &PointSet, oracle: &mut dyn Oracle) -> RunResult {
    run_exact(cfg, kernel, candidates, oracle, cfg.c_tilde, "gp_bucb")
}

fn run_exact(
    cfg: &OptimizerConfig,
    kernel: &KernelSpec,
    candidates: &PointSet,
    oracle: &mut dyn Oracle,
    c: f64,
    name: &str,
) -> RunResult {
    let mut trace = RunTrace::new(name, "", oracle.f_star());
    match exact_loop(cfg, kernel, candidates, oracle, c, &mut trace) {
        Ok(()) => Ok(trace),
        Err(error) => Err(RunFailure { error, partial: trace }),
    }
}

fn exact_loop(
    cfg: &OptimizerConfig,
    kernel: &KernelSpec,
    cands: &PointSet,
    oracle: &mut dyn Oracle,
    c: f64,
    trace: &mut RunTrace,
) -> Result<()> {
    check_inputs(cfg, cands, oracle)?;
    let mut clock = Stopwatch::start();
    let mut rng = algorithm_rng(cfg.seed);
    let mut gp = ExactCandidateGp::new(kernel, cands, cfg.lambda)?;
    // Exact variances enter the schedule as log(1 + var).
    let mut beta_log = BetaLog::new(1.0);
    let a = cands.len();
    let mut selected = 0;
    let mut oracle_calls = 0u64;
    let mut batch_id = 0;
    let mut ucb = vec![0.0; a];
    let mut first = true;
    while selected < cfg.horizon {
        let beta = beta_log.beta(cfg);
        let alpha = c * beta;
        let mut acc = ProductAccumulator::new();
        let mut batch = Vec::new();
        let mut vars = Vec::new();
        loop {
            let i = if first {
                first = false;
                rng.random_range(0..a)
            } else {
                for (k, u) in ucb.iter_mut().enumerate() {
                    *u = gp.mean(k) + alpha * gp.var(k).sqrt();
                }
                argmax(&ucb).expect("nonempty candidate set")
            };
            let v = gp.var(i);
            acc.update(v)?;
            gp.add(i)?;
            batch.push(i);
            vars.push(v);
            selected += 1;
            trace.records.push(StepRecord {
                step: selected,
                chosen_index: i,
                f_value: oracle.true_value(i),
                batch_id,
                dict_size: gp.selected().len(),
                accumulator: acc.value(),
                beta,
                alpha,
                wall_nanos: clock.nanos(),
                ucb_recomputations: if batch_id == 0 { 0 } else { a as u64 },
                oracle_calls,
            });
            // The uniform first pull is a batch on its own.
            if batch_id == 0 || acc.should_terminate(c) || selected >= cfg.horizon {
                break;
            }
        }
        clock.pause();
        let y = oracle.evaluate(&batch);
        clock.resume();
        oracle_calls += 1;
        gp.observe(&y?)?;
        for v in vars {
            beta_log.push(v);
        }
        batch_id += 1;
    }
    Ok(())
}
