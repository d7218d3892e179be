use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bbkb::bench::{
    compute_metrics, mean_ci, uniform_baseline, write_summary_csv, write_trace_csv, DataFormat, Dataset,
    MetricSeries, SyntheticKind, TableOracle,
};
use bbkb::optimizer::{
    run_bbkb_with, run_bkb, run_gp_bucb, run_gp_ucb, BatchRule, Init, NoObserver, OptimizerConfig, QBarMode,
    RunTrace,
};
use bbkb::{BbkbError, KernelSpec};
use clap::{Parser, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const ORACLE_STREAM: u64 = 1;
const BASELINE_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Algorithm {
    BbkbGlobal,
    BbkbGlobalLocal,
    Bkb,
    GpUcb,
    GpBucb,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KernelKind {
    Gaussian,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum QBarKind {
    Fixed,
    Thm1,
    Thm2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Libsvm,
}

/// Run a bandit algorithm over a finite candidate set and write per-step
/// traces plus a summary across repetitions.
#[derive(Debug, Parser)]
#[command(name = "bbkb", version)]
struct Args {
    #[arg(long, value_enum, default_value = "bbkb_global")]
    algorithm: Algorithm,
    /// A data file, or `synthetic:<quadratic|rkhs|sines>:<A>:<d>`.
    #[arg(long)]
    dataset: String,
    /// Input format; guessed from the extension when omitted.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Seed for synthetic datasets.
    #[arg(long, default_value_t = 0)]
    data_seed: u64,
    /// Standardize features column-wise before running.
    #[arg(long)]
    standardize: bool,
    #[arg(long, value_enum, default_value = "gaussian")]
    kernel: KernelKind,
    #[arg(long, default_value_t = 1.0)]
    bandwidth: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 2.0)]
    c_tilde: f64,
    #[arg(long, value_enum, default_value = "fixed")]
    q_bar_mode: QBarKind,
    /// Oversampling value used with `--q-bar-mode fixed`.
    #[arg(long, default_value_t = 2.0)]
    q_bar: f64,
    #[arg(long, default_value_t = 0.01)]
    xi: f64,
    #[arg(long, default_value_t = 1.0)]
    big_f: f64,
    /// Failure probability, a number or `1/T`.
    #[arg(long, default_value = "1/T")]
    delta: String,
    #[arg(short = 'T', long, default_value_t = 100)]
    horizon: usize,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    /// Repetition k uses seed `seed + k`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Target parallelism for `bbkb_global_local` and uncertainty sampling.
    #[arg(long, default_value_t = 0)]
    min_parallelism: usize,
    /// `none`, `uncertainty`, or `warm:<csv with index,y columns>`.
    #[arg(long, default_value = "none")]
    init: String,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

/// Invalid configuration or input (exit 1) versus a failure while running
/// (exit 2).
enum Failure {
    Config(String),
    Runtime(String),
}

impl From<BbkbError> for Failure {
    fn from(e: BbkbError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn parse_delta(s: &str, horizon: usize) -> Result<f64, Failure> {
    if s.trim().eq_ignore_ascii_case("1/t") {
        return Ok(1.0 / horizon as f64);
    }
    s.parse()
        .map_err(|_| Failure::Config(format!("--delta must be a number or 1/T, got `{s}`")))
}

fn load_dataset(args: &Args) -> Result<Dataset, Failure> {
    let mut data = if let Some(spec) = args.dataset.strip_prefix("synthetic:") {
        let parts: Vec<&str> = spec.split(':').collect();
        let [kind, a, d] = parts[..] else {
            return Err(Failure::Config(format!(
                "synthetic datasets are `synthetic:<kind>:<A>:<d>`, got `{}`",
                args.dataset
            )));
        };
        let kind: SyntheticKind = kind.parse()?;
        let a = a.parse().map_err(|_| Failure::Config(format!("bad candidate count `{a}`")))?;
        let d = d.parse().map_err(|_| Failure::Config(format!("bad dimension `{d}`")))?;
        Dataset::synthetic(kind, a, d, args.data_seed)?
    } else {
        let path = Path::new(&args.dataset);
        let format = match args.format {
            Some(Format::Csv) => DataFormat::Csv,
            Some(Format::Libsvm) => DataFormat::Libsvm,
            None if path.extension().is_some_and(|e| e == "csv") => DataFormat::Csv,
            None => DataFormat::Libsvm,
        };
        Dataset::load(path, format).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?
    };
    if args.standardize {
        data.standardize();
    }
    Ok(data)
}

fn load_warm(path: &str, a: usize) -> Result<Init, Failure> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Failure::Config(format!("{path}: {e}")))?;
    let (mut arms, mut feedback) = (Vec::new(), Vec::new());
    for (n, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Failure::Config(format!("{path}: {e}")))?;
        let bad = || Failure::Config(format!("{path}:{}: expected `index,y`", n + 2));
        let idx: usize = row.get(0).and_then(|v| v.trim().parse().ok()).ok_or_else(bad)?;
        let y: f64 = row.get(1).and_then(|v| v.trim().parse().ok()).ok_or_else(bad)?;
        if idx >= a {
            return Err(Failure::Config(format!("{path}:{}: index {idx} out of range", n + 2)));
        }
        arms.push(idx);
        feedback.push(y);
    }
    if arms.is_empty() {
        return Err(Failure::Config(format!("{path}: no initial evaluations")));
    }
    Ok(Init::Warm { arms, feedback })
}

fn build(args: &Args, data: &Dataset) -> Result<(OptimizerConfig, KernelSpec, Init), Failure> {
    let q_bar = match args.q_bar_mode {
        QBarKind::Fixed => QBarMode::Fixed(args.q_bar),
        QBarKind::Thm1 => QBarMode::Thm1,
        QBarKind::Thm2 => QBarMode::Thm2,
    };
    let cfg = OptimizerConfig {
        lambda: args.lambda,
        c_tilde: args.c_tilde,
        q_bar,
        xi: args.xi,
        big_f: args.big_f,
        delta: parse_delta(&args.delta, args.horizon)?,
        horizon: args.horizon,
        rule: match args.algorithm {
            Algorithm::BbkbGlobalLocal => BatchRule::GlobalLocal,
            _ => BatchRule::Global,
        },
        min_parallelism: args.min_parallelism,
        seed: args.seed,
    };
    cfg.validate()?;
    if args.reps == 0 {
        return Err(Failure::Config("--reps must be at least 1".into()));
    }
    let kernel = match args.kernel {
        KernelKind::Gaussian => KernelSpec::gaussian(args.bandwidth)?,
        KernelKind::Linear => KernelSpec::linear_for(data.features())?,
    };
    let init = match args.init.as_str() {
        "none" => Init::Uniform,
        "uncertainty" => {
            if args.min_parallelism == 0 {
                return Err(Failure::Config("--init uncertainty needs --min-parallelism >= 1".into()));
            }
            Init::UncertaintySampling
        }
        other => match other.strip_prefix("warm:") {
            Some(path) => load_warm(path, data.len())?,
            None => return Err(Failure::Config(format!("unknown --init `{other}`"))),
        },
    };
    let sparse = matches!(args.algorithm, Algorithm::BbkbGlobal | Algorithm::BbkbGlobalLocal);
    if init != Init::Uniform && !sparse {
        return Err(Failure::Config("--init is only supported for bbkb_global and bbkb_global_local".into()));
    }
    Ok((cfg, kernel, init))
}

fn run_once(
    args: &Args,
    data: &Dataset,
    cfg: &OptimizerConfig,
    kernel: &KernelSpec,
    init: &Init,
) -> Result<(RunTrace, MetricSeries), Failure> {
    let mut oracle = TableOracle::for_dataset(data, cfg.xi, cfg.seed, ORACLE_STREAM)?;
    let mut base_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    base_rng.set_stream(BASELINE_STREAM);
    let baseline = uniform_baseline(&oracle, cfg.horizon, &mut base_rng)?;
    let feats = data.features();
    let result = match args.algorithm {
        Algorithm::BbkbGlobal | Algorithm::BbkbGlobalLocal => {
            run_bbkb_with(cfg, kernel, feats, &mut oracle, init, &mut NoObserver)
        }
        Algorithm::Bkb => run_bkb(cfg, kernel, feats, &mut oracle),
        Algorithm::GpUcb => run_gp_ucb(cfg, kernel, feats, &mut oracle),
        Algorithm::GpBucb => run_gp_bucb(cfg, kernel, feats, &mut oracle),
        Algorithm::Uniform => Ok(baseline.clone()),
    };
    let mut trace = result.map_err(|f| {
        Failure::Runtime(format!("seed {}: {f}", cfg.seed))
    })?;
    trace.dataset = data.name().to_string();
    let metrics = compute_metrics(&trace, &baseline).map_err(|e| Failure::Runtime(e.to_string()))?;
    Ok((trace, metrics))
}

fn write_outputs(out: &Path, runs: &[(RunTrace, MetricSeries)]) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::Runtime(format!("{}: {e}", out.display()));
    fs::create_dir_all(out).map_err(io)?;
    let mut written: Vec<PathBuf> = Vec::new();
    let result = (|| {
        for (k, (trace, metrics)) in runs.iter().enumerate() {
            let path = out.join(format!("trace_rep{k}.csv"));
            written.push(path.clone());
            let f = fs::File::create(&path).map_err(io)?;
            write_trace_csv(f, trace, metrics).map_err(|e| Failure::Runtime(e.to_string()))?;
        }
        let path = out.join("summary.csv");
        written.push(path.clone());
        let f = fs::File::create(&path).map_err(io)?;
        let series: Vec<MetricSeries> = runs.iter().map(|(_, m)| m.clone()).collect();
        write_summary_csv(f, &series).map_err(|e| Failure::Runtime(e.to_string()))
    })();
    if result.is_err() {
        for p in &written {
            let _ = fs::remove_file(p);
        }
    }
    result
}

fn run(args: &Args) -> Result<(), Failure> {
    let data = load_dataset(args)?;
    let (cfg, kernel, init) = build(args, &data)?;
    let mut runs = Vec::with_capacity(args.reps);
    for k in 0..args.reps {
        let rep_cfg = OptimizerConfig {
            seed: args.seed + k as u64,
            ..cfg.clone()
        };
        runs.push(run_once(args, &data, &rep_cfg, &kernel, &init)?);
    }
    write_outputs(&args.out, &runs)?;
    let ratios: Vec<f64> = runs.iter().map(|(_, m)| *m.regret_ratio.last().unwrap()).collect();
    let (mean, ci) = mean_ci(&ratios);
    let batches: f64 = runs.iter().map(|(t, _)| t.batch_count() as f64).sum::<f64>() / runs.len() as f64;
    println!(
        "{} on {} (A={}, d={}): regret ratio {mean:.4} +/- {ci:.4}, mean batches {batches:.1}, wrote {}",
        runs[0].0.algorithm,
        data.name(),
        data.len(),
        data.dim(),
        args.out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
