use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major `ny × nx` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    ny: usize,
    nx: usize,
    data: Vec<f64>,
}

impl Grid {
    pub fn new(ny: usize, nx: usize, data: Vec<f64>) -> Result<Self> {
        if ny == 0 || nx == 0 {
            return Err(Error::invalid("grid must be nonempty"));
        }
        Error::check_dim("grid cells", ny * nx, data.len())?;
        Ok(Self { ny, nx, data })
    }

    pub fn filled(ny: usize, nx: usize, value: f64) -> Self {
        Self {
            ny,
            nx,
            data: vec![value; ny * nx],
        }
    }

    pub fn from_fn(ny: usize, nx: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(ny * nx);
        for y in 0..ny {
            for x in 0..nx {
                data.push(f(y, x));
            }
        }
        Self { ny, nx, data }
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.ny, self.nx)
    }

    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.data[y * self.nx + x]
    }

    pub fn set(&mut self, y: usize, x: usize, v: f64) {
        self.data[y * self.nx + x] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.nx)
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.data.len() as f64
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Cyclic shift: entry `(y, x)` moves to `(y + dy, x + dx)`.
    pub fn rolled(&self, dy: usize, dx: usize) -> Self {
        Self::from_fn(self.ny, self.nx, |y, x| {
            self.get(
                (y + self.ny - dy % self.ny) % self.ny,
                (x + self.nx - dx % self.nx) % self.nx,
            )
        })
    }
}

/// Population standard deviation of the grid entries.
pub fn pattern_metric(grid: &Grid) -> f64 {
    // shifting by one entry makes constant grids exactly zero
    let vals = grid.as_slice();
    let n = vals.len() as f64;
    let origin = vals[0];
    let mean = vals.iter().map(|v| v - origin).sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - origin - mean).powi(2)).sum::<f64>() / n;
    var.sqrt()
}
