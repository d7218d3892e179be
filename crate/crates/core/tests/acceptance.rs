//! Acceptance suite. Prints one PASS/FAIL/UNVERIFIED line per criterion.
//! Criteria that need an external dataset report UNVERIFIED when it is
//! missing. The exit status is zero unless `BBKB_ACCEPTANCE_STRICT=1`, in
//! which case any FAIL or UNVERIFIED line fails the run.
//!
//! Run a subset with `cargo test --test acceptance -- 4 9`.

use std::path::PathBuf;
use std::time::Instant;

use bbkb::batching::{product_rule_batch_len, sum_rule_batch_len, LocalTracker};
use bbkb::bench::{compute_metrics, mean_ci, uniform_baseline, DataFormat, Dataset, SyntheticKind, TableOracle};
use bbkb::optimizer::{
    argmax, run_bbkb, run_bbkb_with, run_bkb, run_gp_ucb, Init, OptimizerConfig, QBarMode,
    RunObserver, UcbCache,
};
use bbkb::sparse_gp::{BatchState, Dictionary, ExactCandidateGp, ExactPosterior, History};
use bbkb::{KernelSpec, PointSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ORACLE_STREAM: u64 = 1;
const BASELINE_STREAM: u64 = 2;

enum Status {
    Pass,
    Fail,
    Unverified,
}

struct Outcome {
    status: Status,
    detail: String,
}

fn verdict(ok: bool, detail: String) -> Outcome {
    Outcome {
        status: if ok { Status::Pass } else { Status::Fail },
        detail,
    }
}

fn uniform_points(rng: &mut ChaCha8Rng, n: usize, d: usize, lo: f64, hi: f64) -> PointSet {
    PointSet::from_flat(d, (0..n * d).map(|_| rng.random_range(lo..hi)).collect()).unwrap()
}

// 1. Perfect-dictionary DTC posterior equals the exact posterior.
fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    let mut instances = 0;
    for kernel_kind in 0..2 {
        for &t in &[1usize, 5, 20, 50] {
            let d = 3;
            let x = uniform_points(&mut rng, t, d, -2.0, 2.0);
            let y: Vec<f64> = (0..t).map(|_| rng.random_range(-1.0..1.0)).collect();
            let kernel = if kernel_kind == 0 {
                KernelSpec::gaussian(1.0).unwrap()
            } else {
                KernelSpec::linear_with_bound(12.0).unwrap()
            };
            let lambda = rng.random_range(1.0..3.0);
            let dict = Dictionary::build(&kernel, x.clone(), (0..t).collect()).unwrap();
            let history = History::with_feedback(x.clone(), &y).unwrap();
            let state = BatchState::fit(&kernel, dict, &history, &PointSet::empty(d), lambda, 1.0).unwrap();
            let exact = ExactPosterior::fit(&kernel, &x, &y, lambda).unwrap();
            let queries = uniform_points(&mut rng, 100, d, -2.0, 2.0);
            for q in queries.rows() {
                let (m, v) = exact.predict(q).unwrap();
                worst = worst
                    .max((state.posterior_mean(q).unwrap() - m).abs())
                    .max((state.posterior_var(q).unwrap() - v).abs());
            }
            instances += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst <= 1e-8 && secs < 5.0,
        format!("{instances} instances x 100 queries, max abs error {worst:.2e} (tol 1e-8), {secs:.2}s (limit 5s)"),
    )
}

// 2. Global (sum) and local ratio bounds on random frozen-dictionary instances.
fn ratio_bounds() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut min_slack_global = f64::INFINITY;
    let mut min_slack_local = f64::INFINITY;
    let mut min_order_gap = f64::INFINITY;
    let mut min_slack_span = f64::INFINITY;
    let mut local_violations = 0;
    for _ in 0..1000 {
        let d = rng.random_range(1..=3);
        let kernel = if rng.random_bool(0.8) {
            KernelSpec::gaussian(rng.random_range(0.3..1.5)).unwrap()
        } else {
            KernelSpec::linear_with_bound(d as f64).unwrap()
        };
        let lambda = rng.random_range(1.0..4.0);
        let t = rng.random_range(2..=30);
        let fb = rng.random_range(1..t);
        let a = 12;
        // Candidates double as the pool of selected points.
        let cands = uniform_points(&mut rng, a, d, -1.0, 1.0);
        let arms: Vec<usize> = (0..t).map(|_| rng.random_range(0..a)).collect();
        let mut history = History::new(d);
        for &i in &arms[..fb] {
            history.push(cands.row(i), Some(i)).unwrap();
        }
        let y: Vec<f64> = (0..fb).map(|_| rng.random_range(-1.0..1.0)).collect();
        history.close_batch(&y).unwrap();
        // Arbitrary dictionary: a random nonempty subset of the first fb steps.
        let mut steps: Vec<usize> = (0..fb).filter(|_| rng.random_bool(0.5)).collect();
        if steps.is_empty() {
            steps.push(fb - 1);
        }
        let dict = match Dictionary::build(&kernel, history.points().select(&steps), steps) {
            Ok(d) => d,
            Err(_) => Dictionary::empty(d),
        };
        let mut state = BatchState::fit(&kernel, dict, &history, &cands, lambda, 1.0).unwrap();
        let mut local = LocalTracker::new(state.start_vars().to_vec());
        let mut sum_fb = 0.0;
        let mut span_num = vec![0.0; a];
        for &i in &arms[fb..] {
            sum_fb += state.candidate_start_var(i);
            let cov = state.start_cov_column(i);
            // Covariance with the residual (out-of-span) part removed.
            let zi = state.dictionary().embed(&kernel, cands.row(i)).unwrap();
            for (x, c) in cov.iter().enumerate() {
                let zx = state.dictionary().embed(&kernel, cands.row(x)).unwrap();
                let resid = (kernel.eval(cands.row(x), cands.row(i)).unwrap() - zx.dot(&zi)) / lambda;
                span_num[x] += (c - resid).powi(2);
            }
            local.update(&cov).unwrap();
            state.rank_one_add_arm(i).unwrap();
        }
        let mut violated = false;
        for x in 0..a {
            let v_fb = state.candidate_start_var(x);
            let v_t = state.candidate_var(x);
            min_slack_global = min_slack_global.min((1.0 + sum_fb) * v_t - v_fb);
            if let Some(r) = local.ratio(x) {
                let slack = r * v_t - v_fb;
                min_slack_local = min_slack_local.min(slack);
                violated |= slack < -1e-8;
                min_order_gap = min_order_gap.min((1.0 + sum_fb) - r);
                let r_span = 1.0 + span_num[x] / v_fb;
                min_slack_span = min_slack_span.min(r_span * v_t - v_fb);
            }
        }
        local_violations += violated as usize;
    }
    let secs = start.elapsed().as_secs_f64();
    let tol = -1e-8;
    verdict(
        min_slack_global >= tol && min_slack_local >= tol && min_order_gap >= tol && secs < 30.0,
        format!(
            "1000 instances; min slack global {min_slack_global:.2e}, local {min_slack_local:.2e} \
             ({local_violations} instances below tol), global-minus-local {min_order_gap:.2e} (tol -1e-8), \
             {secs:.2}s (limit 30s); in-span local variant min slack {min_slack_span:.2e}"
        ),
    )
}

// 3. Sum rule admits at least as many points as the product rule.
fn weierstrass_dominance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut violations = 0;
    let mut eligible = 0;
    let mut strict = 0;
    for _ in 0..1000 {
        let len = rng.random_range(1..40);
        let vars: Vec<f64> = (0..len).map(|_| rng.random_range(0.0..0.6)).collect();
        let c = rng.random_range(1.0..4.0);
        let s = sum_rule_batch_len(&vars, c).unwrap();
        let p = product_rule_batch_len(&vars, c).unwrap();
        if s < p {
            violations += 1;
        }
        if s >= 2 {
            eligible += 1;
            if s > p {
                strict += 1;
            }
        }
    }
    let frac = strict as f64 / eligible as f64;
    verdict(
        violations == 0 && frac > 0.5,
        format!("{violations} violations; strict on {strict}/{eligible} = {frac:.3} (need > 0.5)"),
    )
}

fn synthetic_case(a: usize, d: usize, seed: u64) -> Dataset {
    Dataset::synthetic(SyntheticKind::Rkhs, a, d, seed).unwrap()
}

// 4. BBKB with C~ = 1 is BKB.
fn bkb_degeneracy() -> Outcome {
    let data = synthetic_case(100, 2, 44);
    let kernel = KernelSpec::gaussian(0.25).unwrap();
    let cfg = OptimizerConfig {
        c_tilde: 1.0,
        horizon: 200,
        delta: 1.0 / 200.0,
        seed: 4,
        ..Default::default()
    };
    let mut o1 = TableOracle::for_dataset(&data, cfg.xi, cfg.seed, ORACLE_STREAM).unwrap();
    let mut o2 = TableOracle::for_dataset(&data, cfg.xi, cfg.seed, ORACLE_STREAM).unwrap();
    let a = run_bbkb(&cfg, &kernel, data.features(), &mut o1).unwrap();
    let b = run_bkb(&cfg, &kernel, data.features(), &mut o2).unwrap();
    let same = a.choices() == b.choices();
    let first_diff = a.choices().iter().zip(b.choices()).position(|(x, y)| *x != y);
    verdict(
        same && a.len() == 200 && a.batch_count() == 200,
        format!(
            "T=200 A=100: identical choices = {same}, first difference {first_diff:?}, BBKB batches {}",
            a.batch_count()
        ),
    )
}

// 5. Lazy selection returns the exhaustive argmax.
fn lazy_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut mismatches = 0;
    let mut recomputed = 0u64;
    let mut scanned = 0u64;
    for _ in 0..1000 {
        let d = rng.random_range(1..=3);
        let a = rng.random_range(5..60);
        let kernel = KernelSpec::gaussian(rng.random_range(0.2..1.0)).unwrap();
        let cands = uniform_points(&mut rng, a, d, 0.0, 1.0);
        let fb = rng.random_range(1..8);
        let mut history = History::new(d);
        for _ in 0..fb {
            let i = rng.random_range(0..a);
            history.push(cands.row(i), Some(i)).unwrap();
        }
        let y: Vec<f64> = (0..fb).map(|_| rng.random_range(0.0..1.0)).collect();
        history.close_batch(&y).unwrap();
        let steps: Vec<usize> = (0..fb).collect();
        let dict = Dictionary::build(&kernel, history.points().select(&steps), steps).unwrap();
        let alpha = rng.random_range(0.1..3.0);
        let mut state = BatchState::fit(&kernel, dict, &history, &cands, 1.0, alpha).unwrap();
        let mut cache = UcbCache::new();
        cache.rebuild((0..a).map(|i| state.candidate_ucb(i)));
        for _ in 0..rng.random_range(0..6) {
            let i = rng.random_range(0..a);
            state.rank_one_add_arm(i).unwrap();
            cache.invalidate();
        }
        let before = cache.recomputations();
        let lazy = cache.select(|i| state.candidate_ucb(i)).unwrap();
        recomputed += cache.recomputations() - before;
        scanned += a as u64;
        let full: Vec<f64> = (0..a).map(|i| state.candidate_ucb(i)).collect();
        if Some(lazy) != argmax(&full) {
            mismatches += 1;
        }
    }
    verdict(
        mismatches == 0,
        format!("1000 states, {mismatches} mismatches; recomputed {recomputed} of {scanned} UCBs"),
    )
}

/// Tracks the exact GP alongside a run and checks approximation quality at
/// every batch start.
struct ExactTracker {
    gp: ExactCandidateGp,
    synced: usize,
    seq_var_sum: f64,
    arms: Vec<usize>,
    sandwich_checks: usize,
    sandwich_violations: usize,
    worst_ratio: f64,
    dict_violations: usize,
    q_bar: QBarMode,
    delta: f64,
    c_tilde: f64,
    kappa_sq: f64,
    lambda: f64,
}

impl ExactTracker {
    fn new(kernel: &KernelSpec, cands: &PointSet, cfg: &OptimizerConfig) -> Self {
        ExactTracker {
            gp: ExactCandidateGp::new(kernel, cands, cfg.lambda).unwrap(),
            synced: 0,
            seq_var_sum: 0.0,
            arms: Vec::new(),
            sandwich_checks: 0,
            sandwich_violations: 0,
            worst_ratio: 1.0,
            dict_violations: 0,
            q_bar: cfg.q_bar,
            delta: cfg.delta,
            c_tilde: cfg.c_tilde,
            kappa_sq: kernel.kappa_sq(),
            lambda: cfg.lambda,
        }
    }

    fn sync(&mut self, arms: impl Iterator<Item = usize>) {
        for arm in arms.skip(self.synced) {
            self.seq_var_sum += self.gp.var(arm);
            self.gp.add(arm).unwrap();
            self.arms.push(arm);
            self.synced += 1;
        }
    }
}

impl RunObserver for ExactTracker {
    fn on_batch_start(&mut self, state: &BatchState, history: &History) {
        self.sync(history.arms().iter().map(|a| a.unwrap()));
        self.sandwich_checks += 1;
        let mut bad = false;
        for i in 0..state.candidate_count() {
            let exact = self.gp.var(i);
            let approx = state.candidate_start_var(i);
            self.worst_ratio = self.worst_ratio.max(approx / exact).max(exact / approx);
            if approx < exact / 3.0 - 1e-10 || approx > 3.0 * exact + 1e-10 {
                bad = true;
            }
        }
        if bad {
            self.sandwich_violations += 1;
        }
        let t = history.len();
        let d_eff: f64 = self.arms.iter().map(|&a| self.gp.var(a)).sum();
        let q = self.q_bar.value(t, self.delta, self.c_tilde);
        let bound = 9.0 * self.c_tilde * (1.0 + self.kappa_sq / self.lambda) * q * d_eff;
        if state.dictionary().size() as f64 > bound {
            self.dict_violations += 1;
        }
    }
}

struct SuiteRun {
    sandwich_ok: bool,
    worst_ratio: f64,
    batches: usize,
    budget: f64,
    dict_ok: bool,
}

fn theory_suite() -> &'static Vec<SuiteRun> {
    use std::sync::OnceLock;
    static SUITE: OnceLock<Vec<SuiteRun>> = OnceLock::new();
    SUITE.get_or_init(|| {
        (0..100u64)
            .map(|seed| {
                let data = synthetic_case(200, 2, 1000 + seed);
                let kernel = KernelSpec::gaussian(0.25).unwrap();
                let cfg = OptimizerConfig {
                    c_tilde: 2.0,
                    horizon: 500,
                    delta: 1.0 / 500.0,
                    q_bar: QBarMode::Thm1,
                    seed,
                    ..Default::default()
                };
                let mut oracle = TableOracle::for_dataset(&data, cfg.xi, seed, ORACLE_STREAM).unwrap();
                let mut tracker = ExactTracker::new(&kernel, data.features(), &cfg);
                let trace =
                    run_bbkb_with(&cfg, &kernel, data.features(), &mut oracle, &Init::Uniform, &mut tracker)
                        .unwrap();
                tracker.sync(trace.choices().into_iter());
                let c = cfg.c_tilde;
                let budget = c / (c - 1.0) * 9.0 * (1.0 + kernel.kappa_sq() / cfg.lambda) * tracker.seq_var_sum;
                SuiteRun {
                    sandwich_ok: tracker.sandwich_violations == 0,
                    worst_ratio: tracker.worst_ratio,
                    batches: trace.batch_count(),
                    budget,
                    dict_ok: tracker.dict_violations == 0,
                }
            })
            .collect()
    })
}

// 6. Sandwich bound at every resparsification with the theoretical q_bar.
fn sandwich() -> Outcome {
    let suite = theory_suite();
    let good = suite.iter().filter(|r| r.sandwich_ok).count();
    let worst = suite.iter().map(|r| r.worst_ratio).fold(1.0, f64::max);
    verdict(
        good >= 95,
        format!("{good}/100 runs within [1/3, 3] at every batch start (need >= 95); worst ratio {worst:.6}"),
    )
}

// 7. Batch count and dictionary size budgets.
fn resparsification_budget() -> Outcome {
    let suite = theory_suite();
    let b_ok = suite.iter().filter(|r| (r.batches as f64) <= r.budget).count();
    let d_ok = suite.iter().filter(|r| r.dict_ok).count();
    let max_b = suite.iter().map(|r| r.batches).max().unwrap_or(0);
    let min_budget = suite.iter().map(|r| r.budget).fold(f64::INFINITY, f64::min);
    verdict(
        b_ok == suite.len() && d_ok == suite.len(),
        format!(
            "batch-count bound held on {b_ok}/100 runs (max B {max_b}, smallest bound {min_budget:.1}); \
             dictionary bound held on {d_ok}/100"
        ),
    )
}

fn abalone_path() -> Option<PathBuf> {
    if let Ok(p) = std::env::var("BBKB_ABALONE") {
        return Some(PathBuf::from(p));
    }
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
    ["abalone.libsvm", "abalone", "abalone.csv"]
        .iter()
        .map(|n| root.join(n))
        .find(|p| p.exists())
}

fn load_abalone() -> Result<Dataset, String> {
    let path = abalone_path().ok_or_else(|| {
        "Abalone not found: set BBKB_ABALONE or place data/abalone.libsvm (or .csv) in the workspace".to_string()
    })?;
    let format = if path.extension().is_some_and(|e| e == "csv") {
        DataFormat::Csv
    } else {
        DataFormat::Libsvm
    };
    Dataset::load(&path, format).map_err(|e| format!("{}: {e}", path.display()))
}

struct RegretStudy {
    ratios: Vec<f64>,
    first_half: Vec<f64>,
    second_half: Vec<f64>,
    secs: f64,
    shape: (usize, usize),
}

/// The desk-scale protocol: 10 seeded BBKB runs at T = 2000 against the
/// uniform baseline.
fn run_study(data: &Dataset, kernel: &KernelSpec) -> Result<RegretStudy, String> {
    let start = Instant::now();
    let horizon = 2000;
    let mut ratios = Vec::new();
    let mut first_half = Vec::new();
    let mut second_half = Vec::new();
    for rep in 0..10u64 {
        let cfg = OptimizerConfig {
            lambda: 1.0,
            c_tilde: 2.0,
            q_bar: QBarMode::Fixed(2.0),
            delta: 1.0 / horizon as f64,
            big_f: 1.0,
            xi: 0.01,
            horizon,
            seed: rep,
            ..Default::default()
        };
        let mut oracle = TableOracle::for_dataset(data, cfg.xi, rep, ORACLE_STREAM).map_err(|e| e.to_string())?;
        let trace = run_bbkb(&cfg, kernel, data.features(), &mut oracle).map_err(|e| e.to_string())?;
        let mut brng = ChaCha8Rng::seed_from_u64(rep);
        brng.set_stream(BASELINE_STREAM);
        let base = uniform_baseline(&oracle, horizon, &mut brng).map_err(|e| e.to_string())?;
        let m = compute_metrics(&trace, &base).map_err(|e| e.to_string())?;
        ratios.push(*m.regret_ratio.last().unwrap());
        let (a, b) = half_batch_means(&trace);
        first_half.push(a);
        second_half.push(b);
    }
    Ok(RegretStudy {
        ratios,
        first_half,
        second_half,
        secs: start.elapsed().as_secs_f64(),
        shape: (data.len(), data.dim()),
    })
}

fn regret_study() -> &'static Result<RegretStudy, String> {
    use std::sync::OnceLock;
    static STUDY: OnceLock<Result<RegretStudy, String>> = OnceLock::new();
    STUDY.get_or_init(|| run_study(&load_abalone()?, &KernelSpec::gaussian(17.5).unwrap()))
}

/// Same protocol on a synthetic table, reported for information only when
/// the real dataset is missing.
fn proxy_study() -> &'static Result<RegretStudy, String> {
    use std::sync::OnceLock;
    static STUDY: OnceLock<Result<RegretStudy, String>> = OnceLock::new();
    STUDY.get_or_init(|| {
        // A kernel that is nearly flat across the data, as 17.5 is on Abalone.
        let data = Dataset::synthetic(SyntheticKind::Quadratic, 4177, 8, 8).map_err(|e| e.to_string())?;
        run_study(&data, &KernelSpec::gaussian(10.0).unwrap())
    })
}

fn half_means(s: &RegretStudy) -> (f64, f64) {
    let a = s.first_half.iter().sum::<f64>() / s.first_half.len() as f64;
    let b = s.second_half.iter().sum::<f64>() / s.second_half.len() as f64;
    (a, b)
}

fn with_proxy(msg: &str, describe: impl Fn(&RegretStudy) -> String) -> Outcome {
    let proxy = match proxy_study() {
        Ok(p) => describe(p),
        Err(e) => format!("proxy failed: {e}"),
    };
    unverified(&format!("{msg}. Smooth synthetic stand-in (A=4177, d=8, not a verdict): {proxy}"))
}

/// Mean batch size among batches starting in each half of the run; the
/// final batch is cut short by the horizon and left out.
fn half_batch_means(trace: &bbkb::optimizer::RunTrace) -> (f64, f64) {
    let half = trace.len() / 2;
    let sizes = trace.batch_sizes();
    let mut step = 1;
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (k, &s) in sizes.iter().enumerate() {
        if k + 1 < sizes.len() {
            if step <= half {
                a.push(s as f64)
            } else {
                b.push(s as f64)
            }
        }
        step += s;
    }
    let mean = |v: &[f64]| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
    (mean(&a), mean(&b))
}

fn unverified(msg: &str) -> Outcome {
    Outcome {
        status: Status::Unverified,
        detail: msg.to_string(),
    }
}

// 8. Regret ratio against uniform on Abalone.
fn abalone_regret() -> Outcome {
    let describe = |s: &RegretStudy| {
        let (m, h) = mean_ci(&s.ratios);
        format!("R_T/R_T^unif = {m:.3} +/- {h:.3}, {:.0}s", s.secs)
    };
    match regret_study() {
        Err(msg) => with_proxy(msg, describe),
        Ok(s) => {
            let (m, h) = mean_ci(&s.ratios);
            verdict(
                s.shape == (4177, 8) && m < 0.6 && m + h < 1.0 && s.secs < 600.0,
                format!(
                    "A={} d={}: {} (need < 0.6 and interval below 1.0; limit 600s)",
                    s.shape.0,
                    s.shape.1,
                    describe(s)
                ),
            )
        }
    }
}

// 11. Batches grow over the run.
fn batch_growth() -> Outcome {
    let describe = |s: &RegretStudy| {
        let (a, b) = half_means(s);
        format!("mean batch size first half {a:.2}, second half {b:.2}")
    };
    match regret_study() {
        Err(msg) => with_proxy(msg, describe),
        Ok(s) => {
            let (a, b) = half_means(s);
            verdict(b > a, describe(s))
        }
    }
}

// 9. Selection time ordering BBKB < BKB < GP-UCB. BKB refits every step at
// O(A m^2) against O(A t) for the incremental exact baseline, so the
// ordering needs a regime where the dictionary stays well below sqrt(T).
fn computational_ordering() -> Outcome {
    let data = Dataset::synthetic(SyntheticKind::Rkhs, 2000, 2, 909).unwrap();
    let kernel = KernelSpec::gaussian(0.5).unwrap();
    let cfg = OptimizerConfig {
        horizon: 2000,
        delta: 1.0 / 2000.0,
        c_tilde: 2.0,
        seed: 9,
        ..Default::default()
    };
    let time = |which: u8| {
        let mut o = TableOracle::for_dataset(&data, cfg.xi, cfg.seed, ORACLE_STREAM).unwrap();
        let t = match which {
            0 => run_bbkb(&cfg, &kernel, data.features(), &mut o),
            1 => run_bkb(&cfg, &kernel, data.features(), &mut o),
            _ => run_gp_ucb(&cfg, &kernel, data.features(), &mut o),
        }
        .unwrap();
        let last = t.records.last().unwrap();
        let dict = t.records.iter().map(|r| r.dict_size).max().unwrap();
        (last.wall_nanos as f64 / 1e9, dict)
    };
    let ((bbkb, m1), (bkb, m2), (ucb, _)) = (time(0), time(1), time(2));
    verdict(
        bbkb < bkb && bkb < ucb && ucb >= 2.0 * bbkb,
        format!(
            "T=2000 A=2000 d=2: BBKB {bbkb:.2}s, BKB {bkb:.2}s, GP-UCB {ucb:.2}s (GP-UCB/BBKB {:.1}x); \
             max dictionary BBKB {m1}, BKB {m2}",
            ucb / bbkb
        ),
    )
}

// 10. Minimum batch size after uncertainty sampling.
/// Smallest post-init batch over 10 seeds, and the init batch sizes.
fn smallest_post_init_batch(p: usize, c_tilde: f64, q_bar: QBarMode) -> (usize, Vec<usize>) {
    let mut smallest = usize::MAX;
    let mut init_sizes = Vec::new();
    for seed in 0..10u64 {
        let cands = PointSet::from_flat(1, (0..200).map(|i| i as f64 / 199.0).collect()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<f64> = (0..200)
            .map(|i| {
                let x = i as f64 / 199.0;
                (6.0 * x + rng.random_range(0.0..6.0)).sin() + 0.3 * (17.0 * x).cos()
            })
            .collect();
        let data = Dataset::from_raw("wave", cands, &raw).unwrap();
        let kernel = KernelSpec::gaussian(0.1).unwrap();
        let cfg = OptimizerConfig {
            c_tilde,
            min_parallelism: p,
            q_bar,
            horizon: 400,
            delta: 1.0 / 400.0,
            seed,
            ..Default::default()
        };
        let mut oracle = TableOracle::for_dataset(&data, cfg.xi, seed, ORACLE_STREAM).unwrap();
        let trace = run_bbkb_with(
            &cfg,
            &kernel,
            data.features(),
            &mut oracle,
            &Init::UncertaintySampling,
            &mut bbkb::optimizer::NoObserver,
        )
        .unwrap();
        let sizes = trace.batch_sizes();
        init_sizes.push(sizes[0]);
        // Skip the initialization batch and the final batch cut by the horizon.
        if sizes.len() > 2 {
            smallest = smallest.min(*sizes[1..sizes.len() - 1].iter().min().unwrap());
        }
    }
    (smallest, init_sizes)
}

// 10. Minimum batch size after uncertainty sampling. The guarantee rests on
// the sandwich bound, so it is checked with the theoretical q_bar; the
// fixed q_bar = 2 outcome is reported alongside.
fn min_batch_after_init() -> Outcome {
    let (p, c_tilde) = (8, 4.0);
    let bound = p as f64 * (c_tilde - 1.0) / 3.0;
    let (smallest, init_sizes) = smallest_post_init_batch(p, c_tilde, QBarMode::Thm1);
    let (fixed, _) = smallest_post_init_batch(p, c_tilde, QBarMode::Fixed(2.0));
    verdict(
        smallest != usize::MAX && smallest as f64 >= bound,
        format!(
            "P=8 C~=4: smallest post-init batch {smallest} (need >= {bound:.1}); init sizes {init_sizes:?}; \
             with q_bar=2 instead: {fixed}"
        ),
    )
}

fn main() {
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let strict = std::env::var("BBKB_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let criteria: Vec<(u32, &str, fn() -> Outcome)> = vec![
        (1, "oracle equivalence", oracle_equivalence),
        (2, "deterministic ratio bounds", ratio_bounds),
        (3, "sum vs product batch dominance", weierstrass_dominance),
        (4, "BKB degeneracy at C~=1", bkb_degeneracy),
        (5, "lazy argmax exactness", lazy_exactness),
        (6, "sandwich bound", sandwich),
        (7, "resparsification budget", resparsification_budget),
        (8, "regret at desk scale", abalone_regret),
        (9, "computational ordering", computational_ordering),
        (10, "min batch size after init", min_batch_after_init),
        (11, "growth of batches", batch_growth),
    ];
    let (mut passed, mut failed, mut missing) = (0, 0, 0);
    for (id, name, run) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let out = run();
        let tag = match out.status {
            Status::Pass => {
                passed += 1;
                "PASS"
            }
            Status::Fail => {
                failed += 1;
                "FAIL"
            }
            Status::Unverified => {
                missing += 1;
                "UNVERIFIED"
            }
        };
        println!(
            "[{tag}] criterion {id:>2} {name}: {} [{:.1}s]",
            out.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {passed} passed, {failed} failed, {missing} unverified");
    // Red criteria are reported, not hidden; strict mode turns any of them
    // into a failing exit status.
    if strict && failed + missing > 0 {
        std::process::exit(1);
    }
}
