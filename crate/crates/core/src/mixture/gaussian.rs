use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Multivariate normal with a cached Cholesky factor.
#[derive(Debug, Clone)]
pub(crate) struct Gaussian {
    mean: Vec<f64>,
    /// Lower Cholesky factor, row-major.
    chol: Vec<f64>,
    precision: DMatrix<f64>,
    log_norm: f64,
}

impl Gaussian {
    pub fn new(mean: &DVector<f64>, cov: &DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        let chol = cov
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Degenerate("covariance is not positive definite".into()))?;
        let l = chol.l();
        let log_det = 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let precision = chol.inverse();
        let chol = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| l[(i, j)])
            .collect();
        Ok(Self {
            mean: mean.iter().copied().collect(),
            chol,
            precision,
            log_norm: -0.5 * (d as f64 * (2.0 * PI).ln() + log_det),
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }

    /// `ln N(x | μ, Σ)`; `scratch` must hold `dim` values.
    pub fn log_pdf(&self, x: &[f64], scratch: &mut [f64]) -> f64 {
        let d = self.dim();
        // forward substitution L y = x - μ
        let mut quad = 0.0;
        for i in 0..d {
            let row = &self.chol[i * d..i * d + i + 1];
            let mut acc = x[i] - self.mean[i];
            for j in 0..i {
                acc -= row[j] * scratch[j];
            }
            let y = acc / row[i];
            scratch[i] = y;
            quad += y * y;
        }
        self.log_norm - 0.5 * quad
    }
}
