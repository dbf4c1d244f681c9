//! Jacobian-regularized squared error and its regularization-parameter estimate.
//!
//! ```text
//! loss(Θ, h) = 1/(2Nσ²) Σ_i { ‖z_i − g(x_i)‖² + h ‖g'(x_i)‖² − h ‖(z_i − g(x_i)) g''(x_i)‖ }
//! h ≈ d²[1 + (d−1)²] Σ_i ‖z_i − g(x_i)‖² / Σ_i ‖g'(x_i)‖²
//! ```
//!
//! `‖g'‖` is the Frobenius norm of the input Jacobian. The curvature term is a
//! diagnostic only: it is evaluated by central differences of the analytic
//! Jacobian and never differentiated.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::model::SlfnModel;
use crate::error::{Error, Result};

/// Paired inputs (`N × d`) and targets (`N × m`).
#[derive(Debug, Clone, PartialEq)]
pub struct SupervisedSet {
    inputs: DMatrix<f64>,
    targets: DMatrix<f64>,
}

impl SupervisedSet {
    pub fn new(inputs: DMatrix<f64>, targets: DMatrix<f64>) -> Result<Self> {
        if inputs.nrows() == 0 || inputs.ncols() == 0 || targets.ncols() == 0 {
            return Err(Error::invalid("supervised set needs at least one sample and column"));
        }
        Error::check_dim("targets rows", inputs.nrows(), targets.nrows())?;
        if inputs.iter().chain(targets.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("supervised set contains non-finite entries"));
        }
        Ok(Self { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.nrows() == 0
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.ncols()
    }

    pub fn target_dim(&self) -> usize {
        self.targets.ncols()
    }

    pub fn inputs(&self) -> &DMatrix<f64> {
        &self.inputs
    }

    pub fn targets(&self) -> &DMatrix<f64> {
        &self.targets
    }

    pub fn input(&self, i: usize) -> Vec<f64> {
        self.inputs.row(i).iter().copied().collect()
    }

    pub fn target(&self, i: usize) -> DVector<f64> {
        self.targets.row(i).transpose()
    }

    pub(crate) fn check_model(&self, model: &SlfnModel) -> Result<()> {
        Error::check_dim("model input vs data", model.input_dim(), self.input_dim())?;
        Error::check_dim("model output vs targets", model.output_dim(), self.target_dim())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub sse_term: f64,
    pub jacobian_term: f64,
    pub hessian_term: f64,
    pub total: f64,
    pub h_used: f64,
    pub n_samples: usize,
    pub noise_sigma: f64,
}

impl LossBreakdown {
    fn assemble(sse: f64, jac: f64, hess: f64, h: f64, n: usize, sigma: f64) -> Self {
        let mut b = Self {
            sse_term: sse,
            jacobian_term: jac,
            hessian_term: hess,
            total: 0.0,
            h_used: h,
            n_samples: n,
            noise_sigma: sigma,
        };
        b.total = b.recomposed_total();
        b
    }

    pub fn recomposed_total(&self) -> f64 {
        (self.sse_term + self.h_used * self.jacobian_term - self.h_used * self.hessian_term)
            / (2.0 * self.n_samples as f64 * self.noise_sigma * self.noise_sigma)
    }
}

fn check_sigma(model: &SlfnModel) -> Result<()> {
    if model.noise_sigma.is_finite() && model.noise_sigma > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "noise scale sigma = {} must be positive",
            model.noise_sigma
        )))
    }
}

/// Residual-contracted curvature `‖Σ_k r_k ∂²g_k/∂x²‖_F` at one input, by
/// central differences of the analytic Jacobian.
pub fn residual_curvature(model: &SlfnModel, x: &[f64], residual: &DVector<f64>) -> f64 {
    let d = x.len();
    let mut r = DMatrix::zeros(d, d);
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    for b in 0..d {
        let step = 1e-4 * (1.0 + x[b].abs());
        xp[b] = x[b] + step;
        xm[b] = x[b] - step;
        let jp = model.jacobian_from(&model.hidden(&xp));
        let jm = model.jacobian_from(&model.hidden(&xm));
        xp[b] = x[b];
        xm[b] = x[b];
        // column b of each output's Hessian, contracted with the residual
        let col = (jp - jm).transpose() * residual / (2.0 * step);
        r.set_column(b, &col);
    }
    let sym = (&r + r.transpose()) * 0.5;
    sym.norm()
}

pub fn loss_regularized(
    model: &SlfnModel,
    data: &SupervisedSet,
    h: f64,
    include_hessian: bool,
) -> Result<LossBreakdown> {
    data.check_model(model)?;
    check_sigma(model)?;
    if !(h.is_finite() && h >= 0.0) {
        return Err(Error::invalid(format!("regularization parameter h = {h} must be >= 0")));
    }
    let (mut sse, mut jac, mut hess) = (0.0, 0.0, 0.0);
    for i in 0..data.len() {
        let x = data.input(i);
        let hid = model.hidden(&x);
        let residual = data.target(i) - model.output_from(&hid);
        sse += residual.norm_squared();
        jac += model.jacobian_from(&hid).norm_squared();
        if include_hessian {
            hess += residual_curvature(model, &x, &residual);
        }
    }
    Ok(LossBreakdown::assemble(
        sse,
        jac,
        hess,
        h,
        data.len(),
        model.noise_sigma,
    ))
}

/// `d²[1 + (d−1)²]` with `d` the input dimension.
pub fn default_reg_prefactor(input_dim: usize) -> f64 {
    let d = input_dim as f64;
    d * d * (1.0 + (d - 1.0) * (d - 1.0))
}

pub fn estimate_reg_param(model: &SlfnModel, data: &SupervisedSet) -> Result<f64> {
    estimate_reg_param_with(model, data, default_reg_prefactor(model.input_dim()))
}

/// Regularization estimate with an explicit prefactor in place of `d²[1+(d−1)²]`.
pub fn estimate_reg_param_with(model: &SlfnModel, data: &SupervisedSet, prefactor: f64) -> Result<f64> {
    let parts = loss_regularized(model, data, 0.0, false)?;
    if !(parts.jacobian_term > 0.0) {
        return Err(Error::Degenerate(
            "input Jacobian vanishes on every sample; h is undefined".into(),
        ));
    }
    Ok(prefactor * parts.sse_term / parts.jacobian_term)
}

/// Reconstruction loss with a Jacobian penalty: targets are the inputs.
pub fn contractive_ae_loss(model: &SlfnModel, inputs: &DMatrix<f64>, h: f64) -> Result<LossBreakdown> {
    if model.output_dim() != inputs.ncols() || model.input_dim() != inputs.ncols() {
        return Err(Error::invalid(format!(
            "autoencoder must map {0} inputs to {0} outputs (model is {1} -> {2})",
            inputs.ncols(),
            model.input_dim(),
            model.output_dim()
        )));
    }
    let data = SupervisedSet::new(inputs.clone(), inputs.clone())?;
    loss_regularized(model, &data, h, false)
}

/// Gradient with respect to every network parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct SlfnGradient {
    pub w_in: DMatrix<f64>,
    pub b_in: DVector<f64>,
    pub w_out: DMatrix<f64>,
    pub b_out: DVector<f64>,
}

impl SlfnGradient {
    fn zeros_like(m: &SlfnModel) -> Self {
        Self {
            w_in: DMatrix::zeros(m.w_in.nrows(), m.w_in.ncols()),
            b_in: DVector::zeros(m.b_in.len()),
            w_out: DMatrix::zeros(m.w_out.nrows(), m.w_out.ncols()),
            b_out: DVector::zeros(m.b_out.len()),
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.w_in *= s;
        self.b_in *= s;
        self.w_out *= s;
        self.b_out *= s;
    }
}

/// Value and exact gradient of `Σ‖z − g‖² + h Σ‖g'‖²_F` (no `1/(2Nσ²)` scaling).
pub fn objective_gradient(model: &SlfnModel, data: &SupervisedSet, h: f64) -> Result<(f64, SlfnGradient)> {
    data.check_model(model)?;
    let mut grad = SlfnGradient::zeros_like(model);
    let mut value = 0.0;
    let w1 = &model.w_in;
    let w2 = &model.w_out;
    for i in 0..data.len() {
        let x = DVector::from_vec(data.input(i));
        let hid = model.hidden(x.as_slice());
        let out = model.output_from(&hid);
        let r = &out - data.target(i);
        value += r.norm_squared();

        // squared error
        let g_out = &r * 2.0;
        grad.w_out.ger(1.0, &g_out, &hid.act, 1.0);
        grad.b_out += &g_out;
        let delta = (w2.transpose() * &g_out).component_mul(&hid.d1);
        grad.w_in.ger(1.0, &delta, &x, 1.0);
        grad.b_in += &delta;

        if h != 0.0 {
            let jac = model.jacobian_from(&hid);
            value += h * jac.norm_squared();
            // G = ∂(h‖J‖²)/∂J
            let g = jac * (2.0 * h);
            let g_w1t = &g * w1.transpose(); // m × H
            for k in 0..w2.nrows() {
                for j in 0..w2.ncols() {
                    grad.w_out[(k, j)] += hid.d1[j] * g_w1t[(k, j)];
                }
            }
            let w2t_g = w2.transpose() * &g; // H × d
            for j in 0..w1.nrows() {
                // through act'(a_j)
                let c = w2t_g.row(j).dot(&w1.row(j));
                let through_a = c * hid.d2[j];
                grad.b_in[j] += through_a;
                for a in 0..w1.ncols() {
                    grad.w_in[(j, a)] += through_a * x[a] + hid.d1[j] * w2t_g[(j, a)];
                }
            }
        }
    }
    Ok((value, grad))
}
