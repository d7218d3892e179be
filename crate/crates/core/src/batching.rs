//! Batch-termination rules and the resparsification sampler.

use rand::Rng;

use crate::error::{invalid, Result};
use crate::kernels::KernelSpec;
use crate::sparse_gp::{Dictionary, History};

/// Denominators at or below this are treated as zero by [`LocalTracker`].
pub const ZERO_VARIANCE: f64 = 1e-14;

fn check_var(v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(invalid(format!("variance must be finite and nonnegative, got {v}")));
    }
    Ok(())
}

/// `1 + sum of batch-start variances` of the points selected so far in
/// the batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalAccumulator {
    acc: f64,
}

impl Default for GlobalAccumulator {
    fn default() -> Self {
        Self::new()
    }
}

impl GlobalAccumulator {
    pub fn new() -> Self {
        GlobalAccumulator { acc: 1.0 }
    }

    pub fn update(&mut self, var_fb: f64) -> Result<()> {
        check_var(var_fb)?;
        self.acc += var_fb;
        Ok(())
    }

    /// The batch continues while the accumulator is at most `c_tilde`.
    pub fn should_terminate(&self, c_tilde: f64) -> bool {
        self.acc > c_tilde
    }

    pub fn value(&self) -> f64 {
        self.acc
    }
}

/// Per-candidate ratios `1 + sum_s k~_fb(x_i, x_s)^2 / sigma~_fb^2(x_i)`.
#[derive(Debug, Clone)]
pub struct LocalTracker {
    numerators: Vec<f64>,
    denominators: Vec<f64>,
}

impl LocalTracker {
    /// `denominators` are the batch-start variances of every candidate.
    pub fn new(denominators: Vec<f64>) -> Self {
        LocalTracker {
            numerators: vec![0.0; denominators.len()],
            denominators,
        }
    }

    /// Adds one selected point, given its batch-start covariance with every
    /// candidate.
    pub fn update(&mut self, cov_fb: &[f64]) -> Result<()> {
        if cov_fb.len() != self.numerators.len() {
            return Err(invalid(format!(
                "covariance column has {} entries for {} candidates",
                cov_fb.len(),
                self.numerators.len()
            )));
        }
        for (n, c) in self.numerators.iter_mut().zip(cov_fb) {
            *n += c * c;
        }
        Ok(())
    }

    /// Ratio for candidate `i`, or `None` when its denominator vanishes.
    pub fn ratio(&self, i: usize) -> Option<f64> {
        let d = self.denominators[i];
        (d > ZERO_VARIANCE).then(|| 1.0 + self.numerators[i] / d)
    }

    pub fn max_ratio(&self) -> f64 {
        (0..self.numerators.len())
            .filter_map(|i| self.ratio(i))
            .fold(1.0, f64::max)
    }

    pub fn should_terminate(&self, c_tilde: f64) -> bool {
        self.max_ratio() > c_tilde
    }

    pub fn numerators(&self) -> &[f64] {
        &self.numerators
    }

    pub fn denominators(&self) -> &[f64] {
        &self.denominators
    }
}

/// `prod_s (1 + sigma^2_{s-1}(x_s))` over the batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductAccumulator {
    acc: f64,
}

impl Default for ProductAccumulator {
    fn default() -> Self {
        Self::new()
    }
}

impl ProductAccumulator {
    pub fn new() -> Self {
        ProductAccumulator { acc: 1.0 }
    }

    pub fn update(&mut self, var_step: f64) -> Result<()> {
        check_var(var_step)?;
        self.acc *= 1.0 + var_step;
        Ok(())
    }

    pub fn should_terminate(&self, c: f64) -> bool {
        self.acc > c
    }

    pub fn value(&self) -> f64 {
        self.acc
    }
}

/// Length of the first batch the sum rule forms from `vars`: the point
/// that pushes the accumulator over `c_tilde` is the last one admitted.
pub fn sum_rule_batch_len(vars: &[f64], c_tilde: f64) -> Result<usize> {
    let mut acc = GlobalAccumulator::new();
    for (k, &v) in vars.iter().enumerate() {
        acc.update(v)?;
        if acc.should_terminate(c_tilde) {
            return Ok(k + 1);
        }
    }
    Ok(vars.len())
}

/// Same as [`sum_rule_batch_len`] for the product rule.
pub fn product_rule_batch_len(vars: &[f64], c: f64) -> Result<usize> {
    let mut acc = ProductAccumulator::new();
    for (k, &v) in vars.iter().enumerate() {
        acc.update(v)?;
        if acc.should_terminate(c) {
            return Ok(k + 1);
        }
    }
    Ok(vars.len())
}

/// Inclusion probability `min(1, q_bar * var)`.
pub fn inclusion_probability(q_bar: f64, var: f64) -> f64 {
    (q_bar * var).clamp(0.0, 1.0)
}

/// Steps kept by one resparsification draw. One uniform is consumed per
/// step in order; when nothing is kept the latest step is forced in.
/// Repeated selections of the same arm collapse to the first kept step,
/// since duplicate inducing points span the same space.
pub fn sample_steps<R: Rng + ?Sized>(
    history: &History,
    vars_fb: &[f64],
    q_bar: f64,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let t = history.len();
    if vars_fb.len() != t {
        return Err(invalid(format!("{} variances for {t} selected points", vars_fb.len())));
    }
    if t == 0 {
        return Err(invalid("cannot resparsify an empty history"));
    }
    if !(q_bar >= 0.0) {
        return Err(invalid(format!("q_bar must be nonnegative, got {q_bar}")));
    }
    let mut kept = Vec::new();
    for (s, &v) in vars_fb.iter().enumerate() {
        let u: f64 = rng.random();
        if u < inclusion_probability(q_bar, v) {
            kept.push(s);
        }
    }
    if kept.is_empty() {
        kept.push(t - 1);
    }
    let mut seen = std::collections::HashSet::new();
    kept.retain(|&s| match history.arm(s) {
        Some(a) => seen.insert(a),
        None => true,
    });
    Ok(kept)
}

/// Draws a new dictionary from the selected points.
pub fn resparsify<R: Rng + ?Sized>(
    kernel: &KernelSpec,
    history: &History,
    vars_fb: &[f64],
    q_bar: f64,
    rng: &mut R,
) -> Result<Dictionary> {
    let steps = sample_steps(history, vars_fb, q_bar, rng)?;
    let points = history.points().select(&steps);
    Dictionary::build(kernel, points, steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn global_accumulator_basics() {
        let mut a = GlobalAccumulator::new();
        a.update(0.0).unwrap();
        assert_eq!(a.value(), 1.0);
        assert!(!a.should_terminate(1.0));
        a.update(0.5).unwrap();
        a.update(0.5).unwrap();
        assert_eq!(a.value(), 2.0);
        assert!(!a.should_terminate(2.0));
        a.update(0.01).unwrap();
        assert!(a.should_terminate(2.0));
        assert!(a.update(-1e-3).is_err());
        assert!(a.update(f64::NAN).is_err());
    }

    #[test]
    fn unit_threshold_stops_on_any_positive_variance() {
        let mut a = GlobalAccumulator::new();
        a.update(1e-9).unwrap();
        assert!(a.should_terminate(1.0));
    }

    #[test]
    fn sum_admits_more_than_product() {
        let vars = [0.5, 0.5];
        assert_eq!(sum_rule_batch_len(&vars, 2.0).unwrap(), 2);
        let mut p = ProductAccumulator::new();
        p.update(0.5).unwrap();
        assert!(!p.should_terminate(2.0));
        p.update(0.5).unwrap();
        assert_eq!(p.value(), 2.25);
        assert!(p.should_terminate(2.0));
        let long = [0.5, 0.5, 0.3];
        assert_eq!(sum_rule_batch_len(&long, 2.0).unwrap(), 3);
        assert_eq!(product_rule_batch_len(&long, 2.0).unwrap(), 2);
    }

    #[test]
    fn product_zero_variance_is_identity() {
        let mut p = ProductAccumulator::new();
        p.update(0.0).unwrap();
        assert_eq!(p.value(), 1.0);
        assert!(p.update(-0.1).is_err());
    }

    #[test]
    fn local_tracker_cases() {
        let mut l = LocalTracker::new(vec![0.4, 0.0, 0.2]);
        assert!(!l.should_terminate(1.0));
        l.update(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(l.numerators(), &[0.0, 0.0, 0.0]);
        l.update(&[0.4, 3.0, 0.1]).unwrap();
        // k~(x, x) = sigma~^2(x) gives ratio 1 + sigma~^2(x).
        assert!((l.ratio(0).unwrap() - 1.4).abs() < 1e-12);
        assert_eq!(l.ratio(1), None);
        assert!((l.ratio(2).unwrap() - 1.05).abs() < 1e-12);
        assert!(l.update(&[0.0]).is_err());

        let mut one = LocalTracker::new(vec![1.0]);
        one.update(&[1.5f64.sqrt()]).unwrap();
        assert!(one.should_terminate(2.0));
    }

    #[test]
    fn resparsify_probabilities() {
        let k = KernelSpec::gaussian(1.0).unwrap();
        let mut h = History::new(1);
        for i in 0..5 {
            h.push(&[i as f64], Some(i)).unwrap();
        }
        h.close_batch(&[0.0; 5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = resparsify(&k, &h, &[0.5; 5], 2.0, &mut rng).unwrap();
        assert_eq!(d.indices(), &[0, 1, 2, 3, 4]);
        let d = resparsify(&k, &h, &[0.5; 5], 0.0, &mut rng).unwrap();
        assert_eq!(d.indices(), &[4]);
    }

    #[test]
    fn repeated_arms_collapse() {
        let mut h = History::new(1);
        for &a in &[2usize, 2, 5, 2] {
            h.push(&[a as f64], Some(a)).unwrap();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let steps = sample_steps(&h, &[1.0; 4], 1.0, &mut rng).unwrap();
        assert_eq!(steps, vec![0, 2]);
    }

    #[test]
    fn mean_dictionary_size_matches_binomial() {
        let mut h = History::new(1);
        let vars: Vec<f64> = (0..40).map(|i| 0.02 * (i % 7) as f64).collect();
        for i in 0..40 {
            h.push(&[i as f64], None).unwrap();
        }
        let q = 3.0;
        let p: Vec<f64> = vars.iter().map(|&v| inclusion_probability(q, v)).collect();
        let mean: f64 = p.iter().sum();
        let sd = p.iter().map(|p| p * (1.0 - p)).sum::<f64>().sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 1000;
        let mut total = 0usize;
        for _ in 0..draws {
            // The forced point only matters when the draw is empty, which
            // has negligible probability here.
            total += sample_steps(&h, &vars, q, &mut rng).unwrap().len();
        }
        let emp = total as f64 / draws as f64;
        assert!((emp - mean).abs() <= 3.0 * sd / (draws as f64).sqrt(), "{emp} vs {mean}");
    }
}
