use nalgebra::{Cholesky, DMatrix, DMatrixView, DVector};

use crate::error::{invalid, BbkbError, Result};
use crate::kernels::KernelSpec;
use crate::points::PointSet;

use super::dictionary::Dictionary;
use super::history::History;

/// Per-candidate quantities that stay fixed for the whole batch.
#[derive(Debug, Clone)]
struct CandidateCache {
    points: PointSet,
    /// Row-major `A x m` embeddings.
    z: Vec<f64>,
    prior: Vec<f64>,
    z_sq: Vec<f64>,
    means: Vec<f64>,
    start_vars: Vec<f64>,
}

/// Frozen-dictionary GP state for one batch.
///
/// `v_inv` tracks `(Z^T Z + lambda I)^{-1}` over every selected point and
/// is updated in place by [`BatchState::rank_one_add`]; `v_inv_fb` and the
/// weights are the batch-start values and never change until the next fit.
#[derive(Debug, Clone)]
pub struct BatchState {
    kernel: KernelSpec,
    dictionary: Dictionary,
    lambda: f64,
    v_inv: DMatrix<f64>,
    v_inv_fb: DMatrix<f64>,
    weights: DVector<f64>,
    alpha: f64,
    t: usize,
    fb: usize,
    ops: u64,
    /// Whether `v_inv` has moved away from `v_inv_fb`.
    live: bool,
    cands: CandidateCache,
}

impl BatchState {
    /// Fits the state from scratch. `candidates` may be empty when only
    /// point queries are needed; history arms index into it when present.
    pub fn fit(
        kernel: &KernelSpec,
        dictionary: Dictionary,
        history: &History,
        candidates: &PointSet,
        lambda: f64,
        alpha: f64,
    ) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(invalid(format!("lambda must be positive, got {lambda}")));
        }
        if history.dim() != dictionary.dim() || candidates.dim() != dictionary.dim() {
            return Err(BbkbError::DimensionMismatch {
                expected: dictionary.dim(),
                got: if history.dim() != dictionary.dim() {
                    history.dim()
                } else {
                    candidates.dim()
                },
            });
        }
        let m = dictionary.size();
        let z = dictionary.embed_all(kernel, candidates);
        let fb = history.last_fb();

        // Repeated arms share an embedding, so accumulate counts and
        // feedback sums per arm and do one outer product each.
        let a = candidates.len();
        let mut count_fb = vec![0.0; a];
        let mut count_late = vec![0.0; a];
        let mut y_sum = vec![0.0; a];
        let mut v_fb = DMatrix::<f64>::zeros(m, m);
        let mut v_late = DMatrix::<f64>::zeros(m, m);
        let mut zty = DVector::<f64>::zeros(m);
        for s in 0..history.len() {
            match history.arm(s) {
                Some(i) if i < a => {
                    if s < fb {
                        count_fb[i] += 1.0;
                        y_sum[i] += history.feedback(s).unwrap_or(0.0);
                    } else {
                        count_late[i] += 1.0;
                    }
                }
                _ => {
                    let zs = dictionary.embed_unchecked(kernel, history.point(s));
                    if s < fb {
                        v_fb.ger(1.0, &zs, &zs, 1.0);
                        zty.axpy(history.feedback(s).unwrap_or(0.0), &zs, 1.0);
                    } else {
                        v_late.ger(1.0, &zs, &zs, 1.0);
                    }
                }
            }
        }
        if m > 0 {
            for i in 0..a {
                if count_fb[i] == 0.0 && count_late[i] == 0.0 {
                    continue;
                }
                let zi = DVector::from_column_slice(&z[i * m..(i + 1) * m]);
                if count_fb[i] > 0.0 {
                    v_fb.ger(count_fb[i], &zi, &zi, 1.0);
                    zty.axpy(y_sum[i], &zi, 1.0);
                }
                if count_late[i] > 0.0 {
                    v_late.ger(count_late[i], &zi, &zi, 1.0);
                }
            }
        }
        for k in 0..m {
            v_fb[(k, k)] += lambda;
        }
        let v_inv_fb = spd_inverse(v_fb.clone())?;
        let weights = &v_inv_fb * zty;
        let v_inv = if history.len() > fb {
            spd_inverse(v_fb + v_late)?
        } else {
            v_inv_fb.clone()
        };

        let prior: Vec<f64> = candidates.rows().map(|x| kernel.diag(x)).collect();
        let mut z_sq = Vec::with_capacity(a);
        let mut means = Vec::with_capacity(a);
        for i in 0..a {
            let zi = &z[i * m..(i + 1) * m];
            z_sq.push(zi.iter().map(|v| v * v).sum());
            means.push(zi.iter().zip(weights.iter()).map(|(p, q)| p * q).sum());
        }
        let mut state = BatchState {
            kernel: *kernel,
            dictionary,
            lambda,
            v_inv,
            v_inv_fb,
            weights,
            alpha,
            t: history.len(),
            fb,
            ops: 0,
            live: false,
            cands: CandidateCache {
                points: candidates.clone(),
                z,
                prior,
                z_sq,
                means,
                start_vars: Vec::new(),
            },
        };
        state.cands.start_vars = if m == 0 {
            (0..a).map(|i| state.quad_var(i, &state.v_inv_fb)).collect()
        } else {
            // Row-major A x m is column-major m x A, so one product gives
            // V_fb^{-1} z_i for every candidate.
            let zt = DMatrixView::from_slice(&state.cands.z, m, a);
            let w = &state.v_inv_fb * zt;
            (0..a)
                .map(|i| {
                    let quad = zt.column(i).dot(&w.column(i));
                    ((state.cands.prior[i] - state.cands.z_sq[i]) / lambda + quad).max(0.0)
                })
                .collect()
        };
        state.live = history.len() > fb;
        Ok(state)
    }

    /// `mu~(x) = z(x)^T weights`, frozen within the batch.
    pub fn posterior_mean(&self, x: &[f64]) -> Result<f64> {
        let z = self.dictionary.embed(&self.kernel, x)?;
        Ok(z.dot(&self.weights))
    }

    /// `(k(x, x2) - z^T z2) / lambda + z^T V^{-1} z2`.
    pub fn posterior_cov(&self, x: &[f64], x2: &[f64]) -> Result<f64> {
        let k = self.kernel.eval(x, x2)?;
        let z = self.dictionary.embed(&self.kernel, x)?;
        let z2 = self.dictionary.embed(&self.kernel, x2)?;
        Ok(cov_formula(k, &z, &z2, &self.v_inv, self.lambda))
    }

    /// Posterior variance, clamped at zero.
    pub fn posterior_var(&self, x: &[f64]) -> Result<f64> {
        Ok(self.posterior_cov(x, x)?.max(0.0))
    }

    /// Covariance under the batch-start inverse `V_fb^{-1}`.
    pub fn posterior_cov_fb(&self, x: &[f64], x2: &[f64]) -> Result<f64> {
        let k = self.kernel.eval(x, x2)?;
        let z = self.dictionary.embed(&self.kernel, x)?;
        let z2 = self.dictionary.embed(&self.kernel, x2)?;
        Ok(cov_formula(k, &z, &z2, &self.v_inv_fb, self.lambda))
    }

    pub fn posterior_var_fb(&self, x: &[f64]) -> Result<f64> {
        Ok(self.posterior_cov_fb(x, x)?.max(0.0))
    }

    /// Sherman-Morrison update of `V^{-1}` with the embedding of `x`.
    pub fn rank_one_add(&mut self, x: &[f64]) -> Result<()> {
        let z = self.dictionary.embed(&self.kernel, x)?;
        self.rank_one_add_embedded(&z)
    }

    /// Same as [`rank_one_add`](Self::rank_one_add) for a cached candidate.
    pub fn rank_one_add_arm(&mut self, arm: usize) -> Result<()> {
        self.check_arm(arm)?;
        let m = self.dictionary.size();
        let z = DVector::from_column_slice(&self.cands.z[arm * m..(arm + 1) * m]);
        self.rank_one_add_embedded(&z)
    }

    fn rank_one_add_embedded(&mut self, z: &DVector<f64>) -> Result<()> {
        let m = z.len();
        let w = &self.v_inv * z;
        let denom = 1.0 + z.dot(&w);
        if !(denom > 0.0) || !denom.is_finite() {
            return Err(BbkbError::NumericalDegeneracy(format!(
                "rank-one denominator {denom}"
            )));
        }
        self.v_inv.ger(-1.0 / denom, &w, &w, 1.0);
        self.live = true;
        self.t += 1;
        self.ops += 2 * (m * m) as u64;
        Ok(())
    }

    fn check_arm(&self, arm: usize) -> Result<()> {
        if arm >= self.cands.prior.len() {
            return Err(invalid(format!(
                "candidate index {arm} out of range for {} candidates",
                self.cands.prior.len()
            )));
        }
        Ok(())
    }

    fn quad_var(&self, i: usize, v_inv: &DMatrix<f64>) -> f64 {
        let m = self.dictionary.size();
        let zi = &self.cands.z[i * m..(i + 1) * m];
        let mut quad = 0.0;
        for c in 0..m {
            let col = v_inv.column(c);
            let mut acc = 0.0;
            for r in 0..m {
                acc += col[r] * zi[r];
            }
            quad += acc * zi[c];
        }
        ((self.cands.prior[i] - self.cands.z_sq[i]) / self.lambda + quad).max(0.0)
    }

    pub fn candidate_count(&self) -> usize {
        self.cands.prior.len()
    }

    pub fn candidates(&self) -> &PointSet {
        &self.cands.points
    }

    /// Frozen mean of candidate `i`.
    pub fn candidate_mean(&self, i: usize) -> f64 {
        self.cands.means[i]
    }

    /// Current variance of candidate `i`, computed from the live `V^{-1}`.
    pub fn candidate_var(&self, i: usize) -> f64 {
        if self.live {
            self.quad_var(i, &self.v_inv)
        } else {
            self.cands.start_vars[i]
        }
    }

    /// Variance of candidate `i` at batch start.
    pub fn candidate_start_var(&self, i: usize) -> f64 {
        self.cands.start_vars[i]
    }

    pub fn start_vars(&self) -> &[f64] {
        &self.cands.start_vars
    }

    pub fn candidate_ucb(&self, i: usize) -> f64 {
        self.cands.means[i] + self.alpha * self.candidate_var(i).sqrt()
    }

    /// `k~_fb(x_i, x_arm)` for every candidate `i`, using batch-start
    /// quantities. Costs `O(A m + m^2)` plus `A` kernel evaluations.
    pub fn start_cov_column(&self, arm: usize) -> Vec<f64> {
        let m = self.dictionary.size();
        let a = self.candidate_count();
        let x = self.cands.points.row(arm);
        let z_arm = DVector::from_column_slice(&self.cands.z[arm * m..(arm + 1) * m]);
        let w = &self.v_inv_fb * &z_arm;
        (0..a)
            .map(|i| {
                let zi = &self.cands.z[i * m..(i + 1) * m];
                let k = self.kernel.eval_unchecked(self.cands.points.row(i), x);
                let mut zz = 0.0;
                let mut zw = 0.0;
                for r in 0..m {
                    zz += zi[r] * z_arm[r];
                    zw += zi[r] * w[r];
                }
                (k - zz) / self.lambda + zw
            })
            .collect()
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dictionary
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn v_inv(&self) -> &DMatrix<f64> {
        &self.v_inv
    }

    pub fn v_inv_fb(&self) -> &DMatrix<f64> {
        &self.v_inv_fb
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn set_alpha(&mut self, alpha: f64) {
        self.alpha = alpha;
    }

    /// Number of selections folded into `v_inv`.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn fb(&self) -> usize {
        self.fb
    }

    /// Multiply-adds spent in rank-one updates since the last fit.
    pub fn ops(&self) -> u64 {
        self.ops
    }
}

fn cov_formula(k: f64, z: &DVector<f64>, z2: &DVector<f64>, v_inv: &DMatrix<f64>, lambda: f64) -> f64 {
    if z.is_empty() {
        return k / lambda;
    }
    (k - z.dot(z2)) / lambda + z.dot(&(v_inv * z2))
}

fn spd_inverse(v: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let chol = Cholesky::new(v)
        .ok_or_else(|| BbkbError::NumericalDegeneracy("V is not positive definite".into()))?;
    let mut inv = chol.inverse();
    let m = inv.nrows();
    for j in 0..m {
        for i in 0..j {
            let v = 0.5 * (inv[(i, j)] + inv[(j, i)]);
            inv[(i, j)] = v;
            inv[(j, i)] = v;
        }
    }
    Ok(inv)
}
