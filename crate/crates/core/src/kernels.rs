//! Covariance functions and kernel-matrix construction.

use nalgebra::DMatrix;

use crate::error::{invalid, BbkbError, Result};
use crate::points::PointSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelFamily {
    /// `exp(-|x - x'|^2 / (2 bandwidth^2))`
    Gaussian { bandwidth: f64 },
    /// `x . x'`
    Linear,
}

/// A bounded covariance function together with its bound `kappa_sq >= k(x, x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    kappa_sq: f64,
}

impl KernelSpec {
    pub fn gaussian(bandwidth: f64) -> Result<Self> {
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(invalid(format!("gaussian bandwidth must be positive, got {bandwidth}")));
        }
        Ok(KernelSpec {
            family: KernelFamily::Gaussian { bandwidth },
            kappa_sq: 1.0,
        })
    }

    /// Linear kernel whose bound is the largest squared norm in `candidates`.
    pub fn linear_for(candidates: &PointSet) -> Result<Self> {
        let kappa_sq = candidates.max_sq_norm();
        if !(kappa_sq > 0.0) {
            return Err(invalid("linear kernel needs at least one nonzero candidate"));
        }
        Ok(KernelSpec {
            family: KernelFamily::Linear,
            kappa_sq,
        })
    }

    /// Linear kernel with an explicitly supplied bound.
    pub fn linear_with_bound(kappa_sq: f64) -> Result<Self> {
        if !(kappa_sq.is_finite() && kappa_sq > 0.0) {
            return Err(invalid(format!("kappa_sq must be positive, got {kappa_sq}")));
        }
        Ok(KernelSpec {
            family: KernelFamily::Linear,
            kappa_sq,
        })
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn kappa_sq(&self) -> f64 {
        self.kappa_sq
    }

    pub fn eval(&self, x: &[f64], x2: &[f64]) -> Result<f64> {
        if x.len() != x2.len() {
            return Err(BbkbError::DimensionMismatch {
                expected: x.len(),
                got: x2.len(),
            });
        }
        if x.is_empty() {
            return Err(invalid("points must have dimension at least 1"));
        }
        Ok(self.eval_unchecked(x, x2))
    }

    /// Kernel evaluation without the dimension check. Callers guarantee
    /// `x.len() == x2.len()`.
    #[inline]
    pub fn eval_unchecked(&self, x: &[f64], x2: &[f64]) -> f64 {
        match self.family {
            KernelFamily::Gaussian { bandwidth } => {
                let sq: f64 = x.iter().zip(x2).map(|(a, b)| (a - b) * (a - b)).sum();
                (-sq / (2.0 * bandwidth * bandwidth)).exp()
            }
            KernelFamily::Linear => x.iter().zip(x2).map(|(a, b)| a * b).sum(),
        }
    }

    /// `k(x, x)`.
    #[inline]
    pub fn diag(&self, x: &[f64]) -> f64 {
        match self.family {
            KernelFamily::Gaussian { .. } => 1.0,
            KernelFamily::Linear => x.iter().map(|a| a * a).sum(),
        }
    }

    /// Matrix with entry `(i, j) = k(xs_i, ys_j)`.
    pub fn matrix(&self, xs: &PointSet, ys: &PointSet) -> Result<DMatrix<f64>> {
        if xs.dim() != ys.dim() {
            return Err(BbkbError::DimensionMismatch {
                expected: xs.dim(),
                got: ys.dim(),
            });
        }
        Ok(DMatrix::from_fn(xs.len(), ys.len(), |i, j| {
            self.eval_unchecked(xs.row(i), ys.row(j))
        }))
    }

    /// Symmetric Gram matrix of a single point set; only the upper triangle
    /// is evaluated and mirrored, so the result is exactly symmetric.
    pub fn gram(&self, xs: &PointSet) -> DMatrix<f64> {
        let n = xs.len();
        let mut k = DMatrix::zeros(n, n);
        for j in 0..n {
            for i in 0..=j {
                let v = self.eval_unchecked(xs.row(i), xs.row(j));
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        k
    }

    /// Column vector `[k(s_1, x), ..., k(s_m, x)]`.
    pub fn column(&self, set: &PointSet, x: &[f64]) -> Vec<f64> {
        set.rows().map(|s| self.eval_unchecked(s, x)).collect()
    }
}
