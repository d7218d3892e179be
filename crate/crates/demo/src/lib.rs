//! wasm-bindgen front end for the browser demo in `www/`.
//!
//! Everything runs on a one-dimensional candidate table so results can be
//! drawn directly. The plain functions return `Result<_, String>` and are
//! what the native tests exercise; the exported wrappers only convert
//! errors for JavaScript.

use bbkb::bench::{Dataset, SyntheticKind, TableOracle};
use bbkb::optimizer::{run_bbkb, run_bkb, run_gp_bucb, run_gp_ucb, BatchRule, OptimizerConfig, RunTrace};
use bbkb::sparse_gp::{BatchState, Dictionary, ExactPosterior, History};
use bbkb::{KernelSpec, PointSet};
use wasm_bindgen::prelude::*;

const NOISE: f64 = 0.05;

/// Exact and Nystrom posteriors evaluated on an even grid over [0, 1].
#[wasm_bindgen(getter_with_clone)]
#[derive(Debug, Clone)]
pub struct Curves {
    pub grid: Vec<f64>,
    pub exact_mean: Vec<f64>,
    pub exact_sd: Vec<f64>,
    pub sparse_mean: Vec<f64>,
    pub sparse_sd: Vec<f64>,
    /// Inputs of the observations kept in the dictionary.
    pub dictionary: Vec<f64>,
}

/// One bandit run over the demo table.
#[wasm_bindgen(getter_with_clone)]
#[derive(Debug, Clone)]
pub struct Run {
    /// Candidate inputs and their noiseless values.
    pub xs: Vec<f64>,
    pub fs: Vec<f64>,
    pub chosen: Vec<u32>,
    pub batch_ids: Vec<u32>,
    pub dict_sizes: Vec<u32>,
    pub batch_sizes: Vec<u32>,
    pub cumulative_regret: Vec<f64>,
}

/// Batch lengths of the three stopping rules on the same table.
#[wasm_bindgen(getter_with_clone)]
#[derive(Debug, Clone)]
pub struct BatchComparison {
    pub global: Vec<u32>,
    pub global_local: Vec<u32>,
    pub product: Vec<u32>,
    /// Final cumulative regret, in the order above.
    pub final_regret: Vec<f64>,
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

pub fn posterior_curves(
    obs_x: &[f64],
    obs_y: &[f64],
    dict_size: usize,
    bandwidth: f64,
    lambda: f64,
    grid_len: usize,
) -> Result<Curves, String> {
    if obs_x.len() != obs_y.len() {
        return Err(format!("{} inputs but {} outputs", obs_x.len(), obs_y.len()));
    }
    if obs_x.is_empty() {
        return Err("add at least one observation".into());
    }
    if grid_len < 2 {
        return Err("grid needs at least two points".into());
    }
    let kernel = KernelSpec::gaussian(bandwidth).map_err(err)?;
    let xs = PointSet::from_flat(1, obs_x.to_vec()).map_err(err)?;
    let exact = ExactPosterior::fit(&kernel, &xs, obs_y, lambda).map_err(err)?;

    // Evenly spaced observations, in input order.
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| obs_x[a].total_cmp(&obs_x[b]));
    let m = dict_size.clamp(1, xs.len());
    let picked: Vec<usize> = (0..m).map(|k| order[k * xs.len() / m]).collect();
    let dictionary: Vec<f64> = picked.iter().map(|&i| obs_x[i]).collect();
    let dict = Dictionary::build(&kernel, xs.select(&picked), picked).map_err(err)?;
    let history = History::with_feedback(xs, obs_y).map_err(err)?;
    let sparse = BatchState::fit(&kernel, dict, &history, &PointSet::empty(1), lambda, 1.0).map_err(err)?;

    let mut c = Curves {
        grid: Vec::with_capacity(grid_len),
        exact_mean: Vec::with_capacity(grid_len),
        exact_sd: Vec::with_capacity(grid_len),
        sparse_mean: Vec::with_capacity(grid_len),
        sparse_sd: Vec::with_capacity(grid_len),
        dictionary,
    };
    for g in 0..grid_len {
        let x = [g as f64 / (grid_len - 1) as f64];
        let (mu, var) = exact.predict(&x).map_err(err)?;
        c.grid.push(x[0]);
        c.exact_mean.push(mu);
        c.exact_sd.push(var.max(0.0).sqrt());
        c.sparse_mean.push(sparse.posterior_mean(&x).map_err(err)?);
        c.sparse_sd.push(sparse.posterior_var(&x).map_err(err)?.max(0.0).sqrt());
    }
    Ok(c)
}

/// The demo table: a bumpy function on `candidates` random points of [0, 1].
fn table(candidates: usize, seed: u64) -> Result<Dataset, String> {
    Dataset::synthetic(SyntheticKind::Rkhs, candidates, 1, seed).map_err(err)
}

fn config(horizon: usize, c_tilde: f64, seed: u64) -> OptimizerConfig {
    OptimizerConfig {
        c_tilde,
        horizon,
        delta: 1.0 / horizon.max(2) as f64,
        xi: NOISE,
        seed,
        ..Default::default()
    }
}

fn to_u32(v: impl IntoIterator<Item = usize>) -> Vec<u32> {
    v.into_iter().map(|x| x as u32).collect()
}

fn regret(trace: &RunTrace) -> Vec<f64> {
    let mut total = 0.0;
    trace
        .records
        .iter()
        .map(|r| {
            total += trace.f_star - r.f_value;
            total
        })
        .collect()
}

fn execute(algorithm: &str, data: &Dataset, cfg: &OptimizerConfig, kernel: &KernelSpec) -> Result<RunTrace, String> {
    let mut oracle = TableOracle::for_dataset(data, cfg.xi, cfg.seed, 1).map_err(err)?;
    let cands = data.features();
    let result = match algorithm {
        "bbkb" => run_bbkb(cfg, kernel, cands, &mut oracle),
        "bbkb_global_local" => {
            let cfg = OptimizerConfig { rule: BatchRule::GlobalLocal, ..cfg.clone() };
            run_bbkb(&cfg, kernel, cands, &mut oracle)
        }
        "bkb" => run_bkb(cfg, kernel, cands, &mut oracle),
        "gp_ucb" => run_gp_ucb(cfg, kernel, cands, &mut oracle),
        "gp_bucb" => run_gp_bucb(cfg, kernel, cands, &mut oracle),
        other => return Err(format!("unknown algorithm `{other}`")),
    };
    result.map_err(err)
}

pub fn bandit_run(
    algorithm: &str,
    candidates: usize,
    horizon: usize,
    c_tilde: f64,
    bandwidth: f64,
    seed: u64,
) -> Result<Run, String> {
    let data = table(candidates, seed)?;
    let cfg = config(horizon, c_tilde, seed);
    cfg.validate().map_err(err)?;
    let kernel = KernelSpec::gaussian(bandwidth).map_err(err)?;
    let trace = execute(algorithm, &data, &cfg, &kernel)?;
    Ok(Run {
        xs: data.features().as_flat().to_vec(),
        fs: data.targets().to_vec(),
        chosen: to_u32(trace.records.iter().map(|r| r.chosen_index)),
        batch_ids: to_u32(trace.records.iter().map(|r| r.batch_id)),
        dict_sizes: to_u32(trace.records.iter().map(|r| r.dict_size)),
        batch_sizes: to_u32(trace.batch_sizes()),
        cumulative_regret: regret(&trace),
    })
}

pub fn compare_batching(
    candidates: usize,
    horizon: usize,
    c_tilde: f64,
    bandwidth: f64,
    min_parallelism: usize,
    seed: u64,
) -> Result<BatchComparison, String> {
    let data = table(candidates, seed)?;
    let cfg = OptimizerConfig { min_parallelism, ..config(horizon, c_tilde, seed) };
    cfg.validate().map_err(err)?;
    let kernel = KernelSpec::gaussian(bandwidth).map_err(err)?;
    let mut out = Vec::with_capacity(3);
    for alg in ["bbkb", "bbkb_global_local", "gp_bucb"] {
        out.push(execute(alg, &data, &cfg, &kernel)?);
    }
    Ok(BatchComparison {
        global: to_u32(out[0].batch_sizes()),
        global_local: to_u32(out[1].batch_sizes()),
        product: to_u32(out[2].batch_sizes()),
        final_regret: out.iter().map(|t| regret(t).last().copied().unwrap_or(0.0)).collect(),
    })
}

#[wasm_bindgen(js_name = posteriorCurves)]
pub fn posterior_curves_js(
    obs_x: Vec<f64>,
    obs_y: Vec<f64>,
    dict_size: usize,
    bandwidth: f64,
    lambda: f64,
    grid_len: usize,
) -> Result<Curves, JsError> {
    posterior_curves(&obs_x, &obs_y, dict_size, bandwidth, lambda, grid_len).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = banditRun)]
pub fn bandit_run_js(
    algorithm: &str,
    candidates: usize,
    horizon: usize,
    c_tilde: f64,
    bandwidth: f64,
    seed: u32,
) -> Result<Run, JsError> {
    bandit_run(algorithm, candidates, horizon, c_tilde, bandwidth, seed.into()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = compareBatching)]
pub fn compare_batching_js(
    candidates: usize,
    horizon: usize,
    c_tilde: f64,
    bandwidth: f64,
    min_parallelism: usize,
    seed: u32,
) -> Result<BatchComparison, JsError> {
    compare_batching(candidates, horizon, c_tilde, bandwidth, min_parallelism, seed.into())
        .map_err(|e| JsError::new(&e))
}
