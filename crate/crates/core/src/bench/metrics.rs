use std::io::Write;

use rand::Rng;

use crate::error::{invalid, Result};
use crate::optimizer::{RunTrace, StepRecord};

use super::oracle::Oracle;

/// `T` uniformly random pulls. No oracle calls are made: only the
/// noiseless values are needed for regret.
pub fn uniform_baseline<R: Rng + ?Sized>(oracle: &dyn Oracle, horizon: usize, rng: &mut R) -> Result<RunTrace> {
    if horizon == 0 {
        return Err(invalid("horizon must be at least 1"));
    }
    if oracle.is_empty() {
        return Err(invalid("candidate set is empty"));
    }
    let mut trace = RunTrace::new("uniform", "", oracle.f_star());
    for step in 1..=horizon {
        let i = rng.random_range(0..oracle.len());
        trace.records.push(StepRecord {
            step,
            chosen_index: i,
            f_value: oracle.true_value(i),
            batch_id: step - 1,
            dict_size: 0,
            accumulator: 1.0,
            beta: 0.0,
            alpha: 0.0,
            wall_nanos: 0,
            ucb_recomputations: 0,
            oracle_calls: 0,
        });
    }
    Ok(trace)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    pub cumulative_regret: Vec<f64>,
    /// `R_t / R_t^unif`; 1 when both are zero, infinite when only the
    /// baseline's is.
    pub regret_ratio: Vec<f64>,
    pub simple_regret: Vec<f64>,
    pub batch_sizes: Vec<usize>,
    pub dict_sizes: Vec<usize>,
    pub wall_time: Vec<u64>,
}

fn cumulative_regret(trace: &RunTrace) -> Vec<f64> {
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

/// Regret metrics of `trace` against a uniform `baseline` of the same
/// horizon. Only noiseless values enter.
pub fn compute_metrics(trace: &RunTrace, baseline: &RunTrace) -> Result<MetricSeries> {
    if trace.len() != baseline.len() {
        return Err(invalid(format!(
            "trace has {} steps but the baseline has {}",
            trace.len(),
            baseline.len()
        )));
    }
    let cumulative = cumulative_regret(trace);
    let base = cumulative_regret(baseline);
    let regret_ratio = cumulative
        .iter()
        .zip(&base)
        .map(|(&r, &u)| {
            if u > 0.0 {
                r / u
            } else if r == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let mut best = f64::NEG_INFINITY;
    let simple_regret = trace
        .records
        .iter()
        .map(|r| {
            best = best.max(r.f_value);
            trace.f_star - best
        })
        .collect();
    Ok(MetricSeries {
        cumulative_regret: cumulative,
        regret_ratio,
        simple_regret,
        batch_sizes: trace.batch_sizes(),
        dict_sizes: trace.records.iter().map(|r| r.dict_size).collect(),
        wall_time: trace.records.iter().map(|r| r.wall_nanos).collect(),
    })
}

/// Sample mean and the half-width `1.96 s / sqrt(n)` of a normal 95%
/// interval (zero for a single sample).
pub fn mean_ci(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, 1.96 * var.sqrt() / n.sqrt())
}

pub const TRACE_COLUMNS: [&str; 12] = [
    "step",
    "batch_id",
    "chosen_index",
    "f_value",
    "cum_regret",
    "regret_ratio",
    "simple_regret",
    "dict_size",
    "beta",
    "alpha",
    "wall_nanos",
    "oracle_calls",
];

pub const SUMMARY_COLUMNS: [&str; 11] = [
    "step",
    "cum_regret_mean",
    "cum_regret_ci95",
    "regret_ratio_mean",
    "regret_ratio_ci95",
    "simple_regret_mean",
    "simple_regret_ci95",
    "dict_size_mean",
    "dict_size_ci95",
    "wall_nanos_mean",
    "wall_nanos_ci95",
];

pub fn write_trace_csv<W: Write>(out: W, trace: &RunTrace, metrics: &MetricSeries) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_COLUMNS)?;
    for (k, r) in trace.records.iter().enumerate() {
        w.write_record(&[
            r.step.to_string(),
            r.batch_id.to_string(),
            r.chosen_index.to_string(),
            r.f_value.to_string(),
            metrics.cumulative_regret[k].to_string(),
            metrics.regret_ratio[k].to_string(),
            metrics.simple_regret[k].to_string(),
            r.dict_size.to_string(),
            r.beta.to_string(),
            r.alpha.to_string(),
            r.wall_nanos.to_string(),
            r.oracle_calls.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-step mean and 95% half-width across repetitions.
pub fn write_summary_csv<W: Write>(out: W, runs: &[MetricSeries]) -> Result<()> {
    let Some(first) = runs.first() else {
        return Err(invalid("no repetitions to summarize"));
    };
    let steps = first.cumulative_regret.len();
    if runs.iter().any(|m| m.cumulative_regret.len() != steps) {
        return Err(invalid("repetitions have different horizons"));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_COLUMNS)?;
    let col = |f: &dyn Fn(&MetricSeries) -> f64| -> (f64, f64) {
        let v: Vec<f64> = runs.iter().map(f).collect();
        mean_ci(&v)
    };
    for k in 0..steps {
        let mut row = vec![(k + 1).to_string()];
        for (m, h) in [
            col(&|s| s.cumulative_regret[k]),
            col(&|s| s.regret_ratio[k]),
            col(&|s| s.simple_regret[k]),
            col(&|s| s.dict_sizes[k] as f64),
            col(&|s| s.wall_time[k] as f64),
        ] {
            row.push(m.to_string());
            row.push(h.to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
