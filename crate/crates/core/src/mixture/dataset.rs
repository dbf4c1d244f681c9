use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// `N × d` sample matrix stored row-major, with optional ground-truth labels.
///
/// Labels are carried for synthetic benchmarks only; no fitting routine reads them.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    dim: usize,
    values: Vec<f64>,
    labels: Option<Vec<usize>>,
}

impl Dataset {
    pub fn from_flat(n: usize, dim: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || dim == 0 {
            return Err(Error::invalid(format!(
                "dataset needs at least one row and one column (got {n}x{dim})"
            )));
        }
        Error::check_dim("dataset values", n * dim, values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("dataset contains non-finite entries"));
        }
        Ok(Self {
            n,
            dim,
            values,
            labels: None,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return Err(Error::invalid(format!(
                "row {i} has {} columns, expected {dim}",
                r.len()
            )));
        }
        Self::from_flat(rows.len(), dim, rows.concat())
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        let values = (0..m.nrows())
            .flat_map(|i| m.row(i).iter().copied().collect::<Vec<_>>())
            .collect();
        Self::from_flat(m.nrows(), m.ncols(), values)
    }

    pub fn with_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        Error::check_dim("labels", self.n, labels.len())?;
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.dim, &self.values)
    }

    /// Copy of the data shifted by `offset` (labels kept).
    pub fn translated(&self, offset: &[f64]) -> Result<Self> {
        Error::check_dim("translation", self.dim, offset.len())?;
        let values = self
            .values
            .chunks_exact(self.dim)
            .flat_map(|r| r.iter().zip(offset).map(|(a, b)| a + b))
            .collect();
        Ok(Self { values, ..self.clone() })
    }

    pub fn mean(&self) -> DVector<f64> {
        let mut m = DVector::zeros(self.dim);
        for r in self.rows() {
            for (acc, v) in m.iter_mut().zip(r) {
                *acc += v;
            }
        }
        m / self.n as f64
    }

    /// Maximum-likelihood covariance (divides by `N`).
    pub fn covariance(&self) -> DMatrix<f64> {
        let mean = self.mean();
        let mut cov = DMatrix::zeros(self.dim, self.dim);
        for r in self.rows() {
            let dev = DVector::from_iterator(self.dim, r.iter().zip(mean.iter()).map(|(a, b)| a - b));
            cov.ger(1.0, &dev, &dev, 1.0);
        }
        cov / self.n as f64
    }

    /// Mean of the per-coordinate variances.
    pub fn mean_marginal_variance(&self) -> f64 {
        self.covariance().trace() / self.dim as f64
    }
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
