//! Row-major storage for sets of points in `R^d`.

use crate::error::{invalid, BbkbError, Result};

/// A finite set of points, stored row-major so that each point is a
/// contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    data: Vec<f64>,
}

impl PointSet {
    /// An empty set of points living in `R^dim`.
    pub fn empty(dim: usize) -> Self {
        PointSet { dim, data: Vec::new() }
    }

    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("points must have dimension at least 1"));
        }
        if data.len() % dim != 0 {
            return Err(invalid(format!(
                "flat buffer of length {} is not a multiple of dimension {}",
                data.len(),
                dim
            )));
        }
        Ok(PointSet { dim, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = match rows.first() {
            Some(r) => r.as_ref().len(),
            None => return Err(invalid("cannot infer dimension from zero rows")),
        };
        let mut set = PointSet::empty(dim);
        for r in rows {
            set.push(r.as_ref())?;
        }
        if dim == 0 {
            return Err(invalid("points must have dimension at least 1"));
        }
        Ok(set)
    }

    pub fn push(&mut self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim {
            return Err(BbkbError::DimensionMismatch {
                expected: self.dim,
                got: point.len(),
            });
        }
        self.data.extend_from_slice(point);
        Ok(())
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim.max(1))
    }

    #[inline]
    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.data.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Gathers the rows at `indices` into a new set.
    pub fn select(&self, indices: &[usize]) -> PointSet {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        PointSet { dim: self.dim, data }
    }

    pub fn max_sq_norm(&self) -> f64 {
        self.rows()
            .map(|r| r.iter().map(|v| v * v).sum::<f64>())
            .fold(0.0, f64::max)
    }
}
