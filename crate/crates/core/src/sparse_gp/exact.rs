use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{invalid, BbkbError, Result};
use crate::kernels::KernelSpec;
use crate::points::PointSet;

/// Exact GP posterior over a fixed training set, via a Cholesky factor of
/// `K + lambda I`.
pub struct ExactPosterior {
    kernel: KernelSpec,
    xs: PointSet,
    lambda: f64,
    chol: Option<Cholesky<f64, Dyn>>,
    alpha: DVector<f64>,
}

impl ExactPosterior {
    pub fn fit(kernel: &KernelSpec, xs: &PointSet, y: &[f64], lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(invalid(format!("lambda must be positive, got {lambda}")));
        }
        if xs.len() != y.len() {
            return Err(invalid(format!("{} points but {} targets", xs.len(), y.len())));
        }
        if xs.is_empty() {
            return Ok(ExactPosterior {
                kernel: *kernel,
                xs: xs.clone(),
                lambda,
                chol: None,
                alpha: DVector::zeros(0),
            });
        }
        let mut k = kernel.gram(xs);
        for i in 0..xs.len() {
            k[(i, i)] += lambda;
        }
        let chol = Cholesky::new(k)
            .ok_or_else(|| BbkbError::NumericalDegeneracy("K + lambda I not positive definite".into()))?;
        let alpha = chol.solve(&DVector::from_column_slice(y));
        Ok(ExactPosterior {
            kernel: *kernel,
            xs: xs.clone(),
            lambda,
            chol: Some(chol),
            alpha,
        })
    }

    /// `(mean, var)` at `x`.
    pub fn predict(&self, x: &[f64]) -> Result<(f64, f64)> {
        if x.len() != self.xs.dim() {
            return Err(BbkbError::DimensionMismatch {
                expected: self.xs.dim(),
                got: x.len(),
            });
        }
        let kxx = self.kernel.diag(x);
        let Some(chol) = &self.chol else {
            return Ok((0.0, kxx / self.lambda));
        };
        let kt = DVector::from_vec(self.kernel.column(&self.xs, x));
        let mean = kt.dot(&self.alpha);
        let l = chol.l_dirty();
        let mut c = kt;
        l.solve_lower_triangular_mut(&mut c);
        let var = ((kxx - c.norm_squared()) / self.lambda).max(0.0);
        Ok((mean, var))
    }
}

/// One-shot exact posterior `(mean, var)` at `x`.
pub fn exact_posterior(
    kernel: &KernelSpec,
    xs: &PointSet,
    y: &[f64],
    lambda: f64,
    x: &[f64],
) -> Result<(f64, f64)> {
    ExactPosterior::fit(kernel, xs, y, lambda)?.predict(x)
}

/// `Tr(K (K + lambda I)^{-1})`, computed from the eigenvalues of `K`.
pub fn effective_dimension(kernel: &KernelSpec, xs: &PointSet, lambda: f64) -> Result<f64> {
    if xs.is_empty() {
        return Err(invalid("effective dimension needs at least one point"));
    }
    if !(lambda > 0.0) {
        return Err(invalid(format!("lambda must be positive, got {lambda}")));
    }
    let eig = kernel.gram(xs).symmetric_eigen();
    Ok(eig
        .eigenvalues
        .iter()
        .map(|&l| {
            let l = l.max(0.0);
            l / (l + lambda)
        })
        .sum())
}

/// The same quantity as the sum of exact posterior variances at the
/// selected points, `sum_s sigma_t^2(x_s)`.
pub fn effective_dimension_from_variances(kernel: &KernelSpec, xs: &PointSet, lambda: f64) -> Result<f64> {
    if xs.is_empty() {
        return Err(invalid("effective dimension needs at least one point"));
    }
    let post = ExactPosterior::fit(kernel, xs, &vec![0.0; xs.len()], lambda)?;
    let mut total = 0.0;
    for x in xs.rows() {
        total += post.predict(x)?.1;
    }
    Ok(total)
}

/// Exact posterior over a finite candidate set, grown one selection at a
/// time by appending a row to the Cholesky factor of `K_t + lambda I`.
///
/// For every step `s` the row `c_s(x) = (L^{-1} k_t(x))_s` is kept for all
/// candidates, so a new selection costs `O(t A)` and variances are updated
/// by subtracting the new row squared.
#[derive(Debug, Clone)]
pub struct ExactCandidateGp {
    kernel: KernelSpec,
    candidates: PointSet,
    lambda: f64,
    arms: Vec<usize>,
    /// Rows of the Cholesky factor; `l_rows[s]` has length `s + 1`.
    l_rows: Vec<Vec<f64>>,
    c_rows: Vec<Vec<f64>>,
    u: Vec<f64>,
    vars: Vec<f64>,
    means: Vec<f64>,
    ops: u64,
}

impl ExactCandidateGp {
    pub fn new(kernel: &KernelSpec, candidates: &PointSet, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(invalid(format!("lambda must be positive, got {lambda}")));
        }
        let vars = candidates.rows().map(|x| kernel.diag(x) / lambda).collect();
        Ok(ExactCandidateGp {
            kernel: *kernel,
            candidates: candidates.clone(),
            lambda,
            arms: Vec::new(),
            l_rows: Vec::new(),
            c_rows: Vec::new(),
            u: Vec::new(),
            vars,
            means: vec![0.0; candidates.len()],
            ops: 0,
        })
    }

    /// Appends candidate `arm` to the conditioning set (no feedback needed).
    pub fn add(&mut self, arm: usize) -> Result<()> {
        let a = self.candidates.len();
        if arm >= a {
            return Err(invalid(format!("candidate index {arm} out of range for {a} candidates")));
        }
        let t = self.arms.len();
        let mut l: Vec<f64> = self.c_rows.iter().map(|row| row[arm]).collect();
        let x = self.candidates.row(arm);
        let d2 = self.kernel.diag(x) + self.lambda - l.iter().map(|v| v * v).sum::<f64>();
        if !(d2 > 0.0) {
            return Err(BbkbError::NumericalDegeneracy(format!("Cholesky pivot {d2}")));
        }
        let d = d2.sqrt();
        let mut row: Vec<f64> = self
            .candidates
            .rows()
            .map(|y| self.kernel.eval_unchecked(x, y))
            .collect();
        for (s, c) in self.c_rows.iter().enumerate() {
            let ls = l[s];
            if ls != 0.0 {
                for (r, cv) in row.iter_mut().zip(c) {
                    *r -= ls * cv;
                }
            }
        }
        for (r, v) in row.iter_mut().zip(self.vars.iter_mut()) {
            *r /= d;
            *v = (*v - *r * *r / self.lambda).max(0.0);
        }
        l.push(d);
        self.ops += ((t + 1) * a) as u64;
        self.l_rows.push(l);
        self.c_rows.push(row);
        self.arms.push(arm);
        Ok(())
    }

    /// Feeds observations for the next `values.len()` selected steps (in
    /// selection order) into the mean.
    pub fn observe(&mut self, values: &[f64]) -> Result<()> {
        let start = self.u.len();
        if start + values.len() > self.arms.len() {
            return Err(invalid("feedback supplied for steps that were never selected"));
        }
        for (k, &y) in values.iter().enumerate() {
            let s = start + k;
            let l = &self.l_rows[s];
            let mut acc = y;
            for j in 0..s {
                acc -= l[j] * self.u[j];
            }
            let us = acc / l[s];
            self.u.push(us);
            for (m, c) in self.means.iter_mut().zip(&self.c_rows[s]) {
                *m += c * us;
            }
        }
        Ok(())
    }

    pub fn var(&self, i: usize) -> f64 {
        self.vars[i]
    }

    pub fn vars(&self) -> &[f64] {
        &self.vars
    }

    /// Mean given the observations fed so far.
    pub fn mean(&self, i: usize) -> f64 {
        self.means[i]
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn selected(&self) -> &[usize] {
        &self.arms
    }

    pub fn observed(&self) -> usize {
        self.u.len()
    }

    pub fn candidates(&self) -> &PointSet {
        &self.candidates
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Multiply-adds spent appending rows.
    pub fn ops(&self) -> u64 {
        self.ops
    }
}

/// `K (K + lambda I)^{-1}` diagonal oracle used in tests and diagnostics.
pub fn ridge_leverage_scores(kernel: &KernelSpec, xs: &PointSet, lambda: f64) -> Result<Vec<f64>> {
    let n = xs.len();
    let k = kernel.gram(xs);
    let mut reg = k.clone();
    for i in 0..n {
        reg[(i, i)] += lambda;
    }
    let chol = Cholesky::new(reg)
        .ok_or_else(|| BbkbError::NumericalDegeneracy("K + lambda I not positive definite".into()))?;
    let sol: DMatrix<f64> = chol.solve(&k);
    Ok((0..n).map(|i| sol[(i, i)]).collect())
}
