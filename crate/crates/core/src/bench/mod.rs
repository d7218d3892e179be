//! Datasets, oracles, the uniform baseline and regret metrics.

mod dataset;
mod metrics;
mod oracle;

pub use dataset::{DataFormat, Dataset, SyntheticKind};
pub use metrics::{
    compute_metrics, mean_ci, uniform_baseline, write_summary_csv, write_trace_csv, MetricSeries,
    SUMMARY_COLUMNS, TRACE_COLUMNS,
};
pub use oracle::{Oracle, TableOracle};
