//! Two-species reaction-diffusion on a periodic square-cell grid:
//! `∂u/∂t = D_u ∇²u + f(u, v)`, `∂v/∂t = D_v ∇²v + g(u, v)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::Grid;
use super::{check_dt, check_positive};
use crate::error::{Error, Result};

/// Local reaction rates `(f, g)` at one cell.
pub trait Kinetics: Send + Sync {
    fn rates(&self, u: f64, v: f64) -> (f64, f64);
}

/// `f = −uv² + F(1 − u)`, `g = uv² − (F + k)v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrayScott {
    pub feed: f64,
    pub kill: f64,
}

impl Default for GrayScott {
    fn default() -> Self {
        Self {
            feed: 0.037,
            kill: 0.06,
        }
    }
}

impl Kinetics for GrayScott {
    #[inline]
    fn rates(&self, u: f64, v: f64) -> (f64, f64) {
        let uvv = u * v * v;
        (-uvv + self.feed * (1.0 - u), uvv - (self.feed + self.kill) * v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdState2D<K = GrayScott> {
    pub u: Grid,
    pub v: Grid,
    pub dx: f64,
    pub d_u: f64,
    pub d_v: f64,
    pub kinetics: K,
    pub time: f64,
}

impl<K: Kinetics + Clone> RdState2D<K> {
    pub fn new(u: Grid, v: Grid, dx: f64, d_u: f64, d_v: f64, kinetics: K) -> Result<Self> {
        let s = Self {
            u,
            v,
            dx,
            d_u,
            d_v,
            kinetics,
            time: 0.0,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.u.shape() != self.v.shape() {
            return Err(Error::invalid(format!(
                "u and v grids differ in shape: {:?} vs {:?}",
                self.u.shape(),
                self.v.shape()
            )));
        }
        let (ny, nx) = self.u.shape();
        if ny.min(nx) < 3 {
            return Err(Error::invalid(format!("2-D grid must be at least 3x3, got {ny}x{nx}")));
        }
        check_positive("dx", self.dx)?;
        check_positive("d_u", self.d_u)?;
        check_positive("d_v", self.d_v)?;
        if !self.u.is_finite() || !self.v.is_finite() {
            return Err(Error::invalid("2-D fields contain non-finite values"));
        }
        Ok(())
    }

    pub fn stability_bound(&self) -> f64 {
        stability_bound_2d(self.dx, self.d_u, self.d_v)
    }
}

/// Rest state `(u, v) = (1, 0)` with a centered `size × size` square at `(0.5, 0.25)`.
pub fn seeded_square(ny: usize, nx: usize, size: usize) -> (Grid, Grid) {
    let (y0, x0) = (ny.saturating_sub(size) / 2, nx.saturating_sub(size) / 2);
    let inside = |y: usize, x: usize| y >= y0 && y < y0 + size && x >= x0 && x < x0 + size;
    let u = Grid::from_fn(ny, nx, |y, x| if inside(y, x) { 0.5 } else { 1.0 });
    let v = Grid::from_fn(ny, nx, |y, x| if inside(y, x) { 0.25 } else { 0.0 });
    (u, v)
}

/// `dx² / (4·max(D_u, D_v))`.
pub fn stability_bound_2d(dx: f64, d_u: f64, d_v: f64) -> f64 {
    dx * dx / (4.0 * d_u.max(d_v))
}

#[inline]
fn lap5(g: &[f64], ny: usize, nx: usize, y: usize, x: usize) -> f64 {
    let up = if y == 0 { ny - 1 } else { y - 1 };
    let down = if y + 1 == ny { 0 } else { y + 1 };
    let left = if x == 0 { nx - 1 } else { x - 1 };
    let right = if x + 1 == nx { 0 } else { x + 1 };
    g[up * nx + x] + g[down * nx + x] + g[y * nx + left] + g[y * nx + right] - 4.0 * g[y * nx + x]
}

pub(crate) fn step_checked<K: Kinetics + Clone>(state: &RdState2D<K>, dt: f64, step: usize) -> Result<RdState2D<K>> {
    let (ny, nx) = state.u.shape();
    let mut next = state.clone();
    let (u0, v0) = (state.u.as_slice(), state.v.as_slice());
    let cu = state.d_u / (state.dx * state.dx);
    let cv = state.d_v / (state.dx * state.dx);
    let kin = &state.kinetics;
    next.u
        .as_mut_slice()
        .par_chunks_mut(nx)
        .zip(next.v.as_mut_slice().par_chunks_mut(nx))
        .enumerate()
        .for_each(|(y, (urow, vrow))| {
            for x in 0..nx {
                let i = y * nx + x;
                let (f, g) = kin.rates(u0[i], v0[i]);
                urow[x] = u0[i] + dt * (cu * lap5(u0, ny, nx, y, x) + f);
                vrow[x] = v0[i] + dt * (cv * lap5(v0, ny, nx, y, x) + g);
            }
        });
    if !next.u.is_finite() || !next.v.is_finite() {
        return Err(Error::NonFinite { step });
    }
    next.time = state.time + dt;
    Ok(next)
}

/// One explicit Euler step from a complete pre-step copy.
pub fn step_turing_2d<K: Kinetics + Clone>(state: &RdState2D<K>, dt: f64) -> Result<RdState2D<K>> {
    state.validate()?;
    check_dt(dt, state.stability_bound())?;
    step_checked(state, dt, 1)
}
