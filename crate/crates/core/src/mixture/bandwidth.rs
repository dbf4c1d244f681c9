//! Smoothing-parameter estimation for the kernel model.
//!
//! The bandwidth solves the implicit equation
//!
//! ```text
//! h² = [ (1/2N) Σ_j (q_h(x_j) − 1) ln q_h(x_j) ] / J_r
//! J_r = (1/2N) Σ_i ‖ Σ_k r_ik (x_i − m_k)ᵀ Σ_k⁻¹ ‖²
//! ```
//!
//! where `q_h` is the kernel density at bandwidth `h` and `r` the mixture
//! posterior. Plain fixed-point iteration is tried first. When the map is
//! locally expansive (slope below −1 at the fixed point, common for compact
//! clusters) the iterates oscillate, and the fixed point is then located by
//! bisection on `ln h²`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{sq_dist, Dataset};
use super::gmm::{GmmModel, MixtureEval};
use super::kde::log_kde;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthOptions {
    pub max_fp_iter: usize,
    pub fp_tol: f64,
    /// Starting `h²`; Silverman's rule when absent.
    pub h0_sq: Option<f64>,
}

impl Default for BandwidthOptions {
    fn default() -> Self {
        Self {
            max_fp_iter: 100,
            fp_tol: 1e-10,
            h0_sq: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedPointMethod {
    Iteration,
    Bisection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthEstimate {
    pub h_sq: f64,
    /// Evaluations of the update map.
    pub iterations: usize,
    pub converged: bool,
    /// The update numerator vanished; `h_sq` is the last admissible iterate.
    pub degenerate: bool,
    pub method: FixedPointMethod,
    pub j_r: f64,
    /// `|update(h²) − h²|` at the returned value.
    pub residual: f64,
    /// Mean of `q(x_j)`. The update compares densities with the constant 1, so
    /// the estimate depends on the data units; values far from 1 mean the
    /// `−1` term dominates or vanishes.
    pub mean_density: f64,
    /// `h²` divided by the mean squared nearest-neighbour distance. The
    /// first-order expansion behind the update assumes this is small.
    pub nn_ratio: f64,
}

/// The bandwidth update map for a fixed dataset and mixture.
#[derive(Debug, Clone)]
pub struct BandwidthMap<'a> {
    data: &'a Dataset,
    j_r: f64,
}

impl<'a> BandwidthMap<'a> {
    pub fn new(data: &'a Dataset, model: &GmmModel) -> Result<Self> {
        let j_r = jacobian_term(data, model)?;
        if !(j_r > 0.0) {
            return Err(Error::Degenerate(
                "J_r vanishes: every sample sits at its posterior-weighted component centre".into(),
            ));
        }
        Ok(Self { data, j_r })
    }

    pub fn j_r(&self) -> f64 {
        self.j_r
    }

    /// `(1/2N) Σ_j (q(x_j) − 1) ln q(x_j)`; never negative.
    pub fn numerator(&self, h_sq: f64) -> f64 {
        let terms: Vec<f64> = (0..self.data.len())
            .into_par_iter()
            .map(|j| {
                let lq = log_kde(self.data, h_sq, self.data.row(j));
                lq.exp_m1() * lq
            })
            .collect();
        terms.iter().sum::<f64>() / (2.0 * self.data.len() as f64)
    }

    /// One application of the update; `None` when the numerator is not positive.
    pub fn apply(&self, h_sq: f64) -> Option<f64> {
        let num = self.numerator(h_sq);
        let next = num / self.j_r;
        (num > 0.0 && next.is_finite() && next > 0.0).then_some(next)
    }

    fn accepts(&self, h_sq: f64, next: f64, tol: f64) -> bool {
        (next - h_sq).abs() < tol * (1.0 + h_sq)
    }
}

/// `J_r` for `data` under `model`.
pub fn jacobian_term(data: &Dataset, model: &GmmModel) -> Result<f64> {
    Error::check_dim("bandwidth model vs data", model.dim(), data.dim())?;
    let eval = MixtureEval::new(model)?;
    let d = data.dim();
    let mut buf = eval.buffers();
    let mut post = vec![0.0; model.k()];
    let mut total = 0.0;
    let mut v = vec![0.0; d];
    let mut dev = vec![0.0; d];
    for x in data.rows() {
        eval.posterior(x, &mut buf, &mut post);
        v.iter_mut().for_each(|e| *e = 0.0);
        for (r, comp) in post.iter().zip(eval.components()) {
            for ((o, a), m) in dev.iter_mut().zip(x).zip(comp.mean()) {
                *o = a - m;
            }
            let p = comp.precision();
            for (a, va) in v.iter_mut().enumerate() {
                let mut s = 0.0;
                for (b, db) in dev.iter().enumerate() {
                    s += p[(a, b)] * db;
                }
                *va += r * s;
            }
        }
        total += v.iter().map(|e| e * e).sum::<f64>();
    }
    Ok(total / (2.0 * data.len() as f64))
}

/// Silverman's rule `(4 / ((d+2) N))^(2/(d+4)) σ̂²`, σ̂² the mean marginal variance.
pub fn silverman_h0_sq(data: &Dataset) -> f64 {
    let n = data.len() as f64;
    let d = data.dim() as f64;
    (4.0 / ((d + 2.0) * n)).powf(2.0 / (d + 4.0)) * data.mean_marginal_variance()
}

fn mean_nn_sq(data: &Dataset) -> f64 {
    if data.len() < 2 {
        return f64::NAN;
    }
    let nn: Vec<f64> = (0..data.len())
        .into_par_iter()
        .map(|i| {
            data.rows()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, x)| sq_dist(x, data.row(i)))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    nn.iter().sum::<f64>() / nn.len() as f64
}

pub fn estimate_bandwidth(data: &Dataset, model: &GmmModel, opts: &BandwidthOptions) -> Result<BandwidthEstimate> {
    if !(opts.fp_tol > 0.0) {
        return Err(Error::invalid("fixed-point tolerance must be positive"));
    }
    let map = BandwidthMap::new(data, model)?;
    let h0 = match opts.h0_sq {
        Some(h) => h,
        None => silverman_h0_sq(data),
    };
    if !(h0.is_finite() && h0 > 0.0) {
        return Err(Error::invalid(format!(
            "initial bandwidth h0^2 = {h0} must be positive"
        )));
    }

    let finish = |h_sq: f64, iterations, converged, degenerate, method, residual| {
        let mean_density = data.rows().map(|x| log_kde(data, h_sq, x).exp()).sum::<f64>() / data.len() as f64;
        BandwidthEstimate {
            h_sq,
            iterations,
            converged,
            degenerate,
            method,
            j_r: map.j_r(),
            residual,
            mean_density,
            nn_ratio: h_sq / mean_nn_sq(data),
        }
    };

    let mut h = h0;
    let mut evals = 0;
    for _ in 0..opts.max_fp_iter {
        evals += 1;
        let Some(next) = map.apply(h) else {
            return Ok(finish(h, evals, false, true, FixedPointMethod::Iteration, f64::NAN));
        };
        if map.accepts(h, next, opts.fp_tol) {
            let residual = (next - h).abs();
            return Ok(finish(h, evals, true, false, FixedPointMethod::Iteration, residual));
        }
        h = next;
    }

    // Oscillating or slow: bracket the root of ln(update(h²)) − ln h² and bisect.
    let residual_log = |t: f64, evals: &mut usize| -> Option<(f64, f64)> {
        *evals += 1;
        let h = t.exp();
        map.apply(h).map(|next| (next.ln() - t, next))
    };
    let t0 = h0.ln();
    let step = 4f64.ln();
    let Some((r0, n0)) = residual_log(t0, &mut evals) else {
        return Ok(finish(h0, evals, false, true, FixedPointMethod::Bisection, f64::NAN));
    };
    if map.accepts(h0, n0, opts.fp_tol) {
        return Ok(finish(
            h0,
            evals,
            true,
            false,
            FixedPointMethod::Bisection,
            (n0 - h0).abs(),
        ));
    }
    let (mut lo, mut hi) = (t0, t0);
    let mut found = false;
    for _ in 0..200 {
        if r0 > 0.0 {
            hi += step;
            match residual_log(hi, &mut evals) {
                Some((r, _)) if r < 0.0 => {
                    found = true;
                    break;
                }
                Some(_) => lo = hi,
                None => {
                    return Ok(finish(
                        hi.exp(),
                        evals,
                        false,
                        true,
                        FixedPointMethod::Bisection,
                        f64::NAN,
                    ))
                }
            }
        } else {
            lo -= step;
            match residual_log(lo, &mut evals) {
                Some((r, _)) if r > 0.0 => {
                    found = true;
                    break;
                }
                Some(_) => hi = lo,
                None => {
                    return Ok(finish(
                        lo.exp(),
                        evals,
                        false,
                        true,
                        FixedPointMethod::Bisection,
                        f64::NAN,
                    ))
                }
            }
        }
    }
    if !found {
        return Ok(finish(h, evals, false, false, FixedPointMethod::Bisection, f64::NAN));
    }
    let mut best = (f64::INFINITY, h);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let h_mid = mid.exp();
        let Some((r, next)) = residual_log(mid, &mut evals) else {
            return Ok(finish(h_mid, evals, false, true, FixedPointMethod::Bisection, f64::NAN));
        };
        let res = (next - h_mid).abs();
        if res < best.0 {
            best = (res, h_mid);
        }
        if map.accepts(h_mid, next, opts.fp_tol) {
            return Ok(finish(h_mid, evals, true, false, FixedPointMethod::Bisection, res));
        }
        if r > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * (1.0 + mid.abs()) {
            break;
        }
    }
    Ok(finish(best.1, evals, false, false, FixedPointMethod::Bisection, best.0))
}
