use rand::Rng;

use crate::batching::resparsify;
use crate::error::{invalid, Result};
use crate::kernels::KernelSpec;
use crate::points::PointSet;
use crate::sparse_gp::{BatchState, Dictionary, ExactCandidateGp, History};

use super::ucb::argmax;

/// Greedy maximum-variance selection (no feedback needed) until every
/// candidate's exact posterior variance is at most `1 / p`. Gives up after
/// `A` selections.
pub fn uncertainty_sampling_init(
    kernel: &KernelSpec,
    candidates: &PointSet,
    p: usize,
    lambda: f64,
) -> Result<Vec<usize>> {
    if p == 0 {
        return Err(invalid("uncertainty sampling needs a target parallelism P >= 1"));
    }
    if candidates.is_empty() {
        return Err(invalid("cannot initialize over an empty candidate set"));
    }
    let threshold = 1.0 / p as f64;
    let mut gp = ExactCandidateGp::new(kernel, candidates, lambda)?;
    let mut chosen = Vec::new();
    loop {
        let i = argmax(gp.vars()).expect("nonempty candidate set");
        if gp.var(i) <= threshold {
            break;
        }
        if chosen.len() == candidates.len() {
            log::warn!(
                "uncertainty sampling stopped after {} selections with max variance {:.3e} above 1/P = {threshold:.3e}",
                chosen.len(),
                gp.var(i)
            );
            break;
        }
        gp.add(i)?;
        chosen.push(i);
    }
    Ok(chosen)
}

pub(crate) fn history_from_arms(candidates: &PointSet, arms: &[usize], feedback: &[f64]) -> Result<History> {
    if let Some(&bad) = arms.iter().find(|&&a| a >= candidates.len()) {
        return Err(invalid(format!("initial index {bad} out of range")));
    }
    if arms.len() != feedback.len() {
        return Err(invalid(format!("{} initial points but {} values", arms.len(), feedback.len())));
    }
    let mut h = History::new(candidates.dim());
    for &a in arms {
        h.push(candidates.row(a), Some(a))?;
    }
    if !arms.is_empty() {
        h.close_batch(feedback)?;
    }
    Ok(h)
}

/// Dictionary and state for pre-existing evaluations: each initial point
/// is kept with probability `min(1, q_bar * sigma^2)` using its exact
/// posterior variance given all the initial data.
pub fn warm_start_dictionary<R: Rng + ?Sized>(
    kernel: &KernelSpec,
    candidates: &PointSet,
    init_arms: &[usize],
    init_feedback: &[f64],
    lambda: f64,
    q_bar: f64,
    alpha: f64,
    rng: &mut R,
) -> Result<(Dictionary, BatchState)> {
    if init_arms.is_empty() {
        return Err(invalid("warm start needs at least one initial evaluation"));
    }
    let history = history_from_arms(candidates, init_arms, init_feedback)?;
    let mut gp = ExactCandidateGp::new(kernel, candidates, lambda)?;
    for &a in init_arms {
        gp.add(a)?;
    }
    let vars: Vec<f64> = init_arms.iter().map(|&a| gp.var(a)).collect();
    let dict = resparsify(kernel, &history, &vars, q_bar, rng)?;
    let state = BatchState::fit(kernel, dict.clone(), &history, candidates, lambda, alpha)?;
    Ok((dict, state))
}
