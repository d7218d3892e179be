use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, BbkbError, Result};

use super::dataset::Dataset;

/// Black-box function over a finite candidate set.
pub trait Oracle {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Noisy evaluations of a whole batch, drawn in index order.
    fn evaluate(&mut self, indices: &[usize]) -> Result<Vec<f64>>;

    /// Noiseless value, used for regret accounting only.
    fn true_value(&self, index: usize) -> f64;

    fn f_star(&self) -> f64;
}

/// Table lookup plus Gaussian noise with standard deviation `xi`.
#[derive(Debug, Clone)]
pub struct TableOracle {
    values: Vec<f64>,
    f_star: f64,
    noise: Option<Normal<f64>>,
    rng: ChaCha8Rng,
    calls: u64,
}

impl TableOracle {
    pub fn new(values: Vec<f64>, xi: f64, seed: u64, stream: u64) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("oracle needs at least one candidate"));
        }
        if !(xi >= 0.0) || !xi.is_finite() {
            return Err(invalid(format!("noise level must be >= 0, got {xi}")));
        }
        let noise = if xi > 0.0 {
            Some(Normal::new(0.0, xi).map_err(|e| invalid(e.to_string()))?)
        } else {
            None
        };
        let f_star = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Ok(TableOracle {
            values,
            f_star,
            noise,
            rng,
            calls: 0,
        })
    }

    pub fn for_dataset(dataset: &Dataset, xi: f64, seed: u64, stream: u64) -> Result<Self> {
        Self::new(dataset.targets().to_vec(), xi, seed, stream)
    }

    /// Number of batch evaluations served.
    pub fn calls(&self) -> u64 {
        self.calls
    }
}

impl Oracle for TableOracle {
    fn len(&self) -> usize {
        self.values.len()
    }

    fn evaluate(&mut self, indices: &[usize]) -> Result<Vec<f64>> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.values.len()) {
            return Err(BbkbError::InvalidInput(format!(
                "candidate index {bad} out of range for {} candidates",
                self.values.len()
            )));
        }
        self.calls += 1;
        Ok(indices
            .iter()
            .map(|&i| {
                let eps = match &self.noise {
                    Some(n) => n.sample(&mut self.rng),
                    None => 0.0,
                };
                self.values[i] + eps
            })
            .collect())
    }

    fn true_value(&self, index: usize) -> f64 {
        self.values[index]
    }

    fn f_star(&self) -> f64 {
        self.f_star
    }
}
