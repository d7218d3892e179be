use nalgebra::{DMatrix, DVector};

use crate::error::{BbkbError, Result};
use crate::kernels::KernelSpec;
use crate::points::PointSet;

/// Relative eigenvalue cutoff used when forming `K_S^{+/2}`: eigenvalues
/// below `PINV_RTOL * max_eigenvalue` are treated as zero.
pub const PINV_RTOL: f64 = 1e-10;

/// Inducing points `S` and the Nystrom embedding map `K_S^{+/2}`.
#[derive(Debug, Clone)]
pub struct Dictionary {
    indices: Vec<usize>,
    points: PointSet,
    embed_map: DMatrix<f64>,
    rank: usize,
}

impl Dictionary {
    /// The empty dictionary. Every embedding is the zero-length vector, so
    /// posteriors collapse to the prior `k(x, x) / lambda`.
    pub fn empty(dim: usize) -> Self {
        Dictionary {
            indices: Vec::new(),
            points: PointSet::empty(dim),
            embed_map: DMatrix::zeros(0, 0),
            rank: 0,
        }
    }

    /// Builds the embedding map from an eigendecomposition of `K_S`,
    /// `K_S^{+/2} = Q diag(l^{-1/2}) Q^T` over the retained eigenpairs.
    ///
    /// `indices` are the history steps the points were drawn from; they are
    /// carried along for bookkeeping only.
    pub fn build(kernel: &KernelSpec, points: PointSet, indices: Vec<usize>) -> Result<Self> {
        let m = points.len();
        if m == 0 {
            return Err(BbkbError::InvalidInput(
                "a dictionary needs at least one inducing point".into(),
            ));
        }
        if indices.len() != m {
            return Err(BbkbError::InvalidInput(format!(
                "{} indices supplied for {} inducing points",
                indices.len(),
                m
            )));
        }
        let gram = kernel.gram(&points);
        let eig = gram.symmetric_eigen();
        let max_eig = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !(max_eig > 0.0) {
            return Err(BbkbError::DegenerateDictionary);
        }
        let cutoff = PINV_RTOL * max_eig;
        let mut embed_map = DMatrix::zeros(m, m);
        let mut rank = 0;
        for (k, &l) in eig.eigenvalues.iter().enumerate() {
            if l > cutoff {
                rank += 1;
                let q = eig.eigenvectors.column(k);
                embed_map.ger(1.0 / l.sqrt(), &q, &q, 1.0);
            }
        }
        if rank == 0 {
            return Err(BbkbError::DegenerateDictionary);
        }
        // ger accumulates rounding asymmetrically; mirror the upper triangle.
        for j in 0..m {
            for i in 0..j {
                let v = 0.5 * (embed_map[(i, j)] + embed_map[(j, i)]);
                embed_map[(i, j)] = v;
                embed_map[(j, i)] = v;
            }
        }
        Ok(Dictionary {
            indices,
            points,
            embed_map,
            rank,
        })
    }

    /// `z(x, S) = K_S^{+/2} k_S(x)`.
    pub fn embed(&self, kernel: &KernelSpec, x: &[f64]) -> Result<DVector<f64>> {
        if x.len() != self.points.dim() {
            return Err(BbkbError::DimensionMismatch {
                expected: self.points.dim(),
                got: x.len(),
            });
        }
        Ok(self.embed_unchecked(kernel, x))
    }

    pub(crate) fn embed_unchecked(&self, kernel: &KernelSpec, x: &[f64]) -> DVector<f64> {
        if self.size() == 0 {
            return DVector::zeros(0);
        }
        let ks = DVector::from_vec(kernel.column(&self.points, x));
        &self.embed_map * ks
    }

    /// Embeds every row of `xs` into a row-major `n x m` buffer.
    pub(crate) fn embed_all(&self, kernel: &KernelSpec, xs: &PointSet) -> Vec<f64> {
        let m = self.size();
        if m == 0 {
            return Vec::new();
        }
        let ks = kernel
            .matrix(xs, &self.points)
            .expect("dictionary and candidates share a dimension");
        // (n x m) * (m x m); embed_map is symmetric so no transpose is needed.
        let z = ks * &self.embed_map;
        let mut out = Vec::with_capacity(xs.len() * m);
        for i in 0..xs.len() {
            out.extend(z.row(i).iter());
        }
        out
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn embed_map(&self) -> &DMatrix<f64> {
        &self.embed_map
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }
}
