use crate::error::{invalid, Result};

/// How the resparsification oversampling `q_bar_t` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QBarMode {
    Fixed(f64),
    /// `8 log(4t / delta)`: enough for the dictionary-size guarantee.
    Thm1,
    /// `72 C~ log(4t / delta)`: enough for the regret guarantee.
    Thm2,
}

impl Default for QBarMode {
    fn default() -> Self {
        QBarMode::Fixed(2.0)
    }
}

impl QBarMode {
    pub fn value(&self, t: usize, delta: f64, c_tilde: f64) -> f64 {
        let log_term = (4.0 * t.max(1) as f64 / delta).ln();
        match *self {
            QBarMode::Fixed(q) => q,
            QBarMode::Thm1 => 8.0 * log_term,
            QBarMode::Thm2 => 72.0 * c_tilde * log_term,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchRule {
    Global,
    /// Switch to the per-candidate rule when the global one would stop a
    /// batch shorter than the configured minimum parallelism.
    GlobalLocal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub lambda: f64,
    pub c_tilde: f64,
    pub q_bar: QBarMode,
    pub xi: f64,
    pub big_f: f64,
    pub delta: f64,
    pub horizon: usize,
    pub rule: BatchRule,
    pub min_parallelism: usize,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            lambda: 1.0,
            c_tilde: 2.0,
            q_bar: QBarMode::default(),
            xi: 0.01,
            big_f: 1.0,
            delta: 0.1,
            horizon: 100,
            rule: BatchRule::Global,
            min_parallelism: 0,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 1.0) || !self.lambda.is_finite() {
            return Err(invalid(format!("lambda must be >= 1, got {}", self.lambda)));
        }
        if !(self.c_tilde >= 1.0) || !self.c_tilde.is_finite() {
            return Err(invalid(format!("c_tilde must be >= 1, got {}", self.c_tilde)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(invalid(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.xi >= 0.0) || !self.xi.is_finite() {
            return Err(invalid(format!("xi must be >= 0, got {}", self.xi)));
        }
        if !(self.big_f >= 0.0) || !self.big_f.is_finite() {
            return Err(invalid(format!("F must be >= 0, got {}", self.big_f)));
        }
        if self.horizon == 0 {
            return Err(invalid("horizon must be at least 1"));
        }
        if let QBarMode::Fixed(q) = self.q_bar {
            if !(q >= 0.0) || !q.is_finite() {
                return Err(invalid(format!("q_bar must be >= 0, got {q}")));
            }
        }
        Ok(())
    }
}

/// Confidence width from a running sum of `log(1 + c * var)` terms.
pub fn beta_from_log_sum(log_sum: f64, xi: f64, lambda: f64, big_f: f64, delta: f64) -> f64 {
    2.0 * xi * (log_sum + (1.0 / delta).ln()).sqrt() + (1.0 + 2f64.sqrt()) * lambda.sqrt() * big_f
}

/// `2 xi sqrt(sum log(1 + 3 var) + log(1/delta)) + (1 + sqrt 2) sqrt(lambda) F`.
pub fn beta_schedule(var_log: &[f64], xi: f64, lambda: f64, big_f: f64, delta: f64) -> f64 {
    let s: f64 = var_log.iter().map(|v| (3.0 * v).ln_1p()).sum();
    beta_from_log_sum(s, xi, lambda, big_f, delta)
}

/// Running form of the schedule. `factor` is 3 for the approximate
/// variances and 1 for exact ones.
#[derive(Debug, Clone)]
pub(crate) struct BetaLog {
    factor: f64,
    sum: f64,
}

impl BetaLog {
    pub(crate) fn new(factor: f64) -> Self {
        BetaLog { factor, sum: 0.0 }
    }

    pub(crate) fn push(&mut self, var: f64) {
        self.sum += (self.factor * var.max(0.0)).ln_1p();
    }

    pub(crate) fn beta(&self, cfg: &OptimizerConfig) -> f64 {
        beta_from_log_sum(self.sum, cfg.xi, cfg.lambda, cfg.big_f, cfg.delta)
    }
}
