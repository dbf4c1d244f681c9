//! Full-batch gradient descent on the first-order regularized loss.

use serde::{Deserialize, Serialize};

use super::loss::{estimate_reg_param, loss_regularized, objective_gradient, SupervisedSet};
use super::model::SlfnModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HMode {
    Fixed(f64),
    /// Re-estimate `h` every epoch, damped `h ← (h_old + h_new) / 2`.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GdOptions {
    pub lr: f64,
    pub epochs: usize,
}

impl Default for GdOptions {
    fn default() -> Self {
        Self { lr: 0.05, epochs: 500 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GdOutcome {
    pub model: SlfnModel,
    /// Total loss before the first step and after every epoch (`epochs + 1` entries).
    pub loss_trace: Vec<f64>,
    pub sse_trace: Vec<f64>,
    /// `h` in effect for each entry of `loss_trace`.
    pub h_trace: Vec<f64>,
}

pub fn train_gd(model: &SlfnModel, data: &SupervisedSet, h_mode: HMode, opts: &GdOptions) -> Result<GdOutcome> {
    model.validate()?;
    data.check_model(model)?;
    if !(opts.lr.is_finite() && opts.lr >= 0.0) {
        return Err(Error::invalid(format!(
            "learning rate {} must be finite and >= 0",
            opts.lr
        )));
    }
    let mut h = match h_mode {
        HMode::Fixed(h) if h.is_finite() && h >= 0.0 => h,
        HMode::Fixed(h) => return Err(Error::invalid(format!("regularization parameter h = {h} must be >= 0"))),
        HMode::Auto => estimate_reg_param(model, data)?,
    };

    let mut model = model.clone();
    let scale = 1.0 / (2.0 * data.len() as f64 * model.noise_sigma * model.noise_sigma);
    let mut loss_trace = Vec::with_capacity(opts.epochs + 1);
    let mut sse_trace = Vec::with_capacity(opts.epochs + 1);
    let mut h_trace = Vec::with_capacity(opts.epochs + 1);

    let record = |model: &SlfnModel, h: f64, epoch: usize, lt: &mut Vec<f64>, st: &mut Vec<f64>, ht: &mut Vec<f64>| {
        let l = loss_regularized(model, data, h, false)?;
        if !l.total.is_finite() {
            return Err(Error::Diverged { epoch, loss: l.total });
        }
        lt.push(l.total);
        st.push(l.sse_term);
        ht.push(h);
        Ok(())
    };
    record(&model, h, 0, &mut loss_trace, &mut sse_trace, &mut h_trace)?;

    for epoch in 1..=opts.epochs {
        let (_, mut grad) = objective_gradient(&model, data, h)?;
        grad.scale(opts.lr * scale);
        model.w_in -= &grad.w_in;
        model.b_in -= &grad.b_in;
        model.w_out -= &grad.w_out;
        model.b_out -= &grad.b_out;
        if let HMode::Auto = h_mode {
            // a flat network has no Jacobian; keep the previous h
            if let Ok(next) = estimate_reg_param(&model, data) {
                h = 0.5 * h + 0.5 * next;
            }
        }
        record(&model, h, epoch, &mut loss_trace, &mut sse_trace, &mut h_trace)?;
    }
    Ok(GdOutcome {
        model,
        loss_trace,
        sse_trace,
        h_trace,
    })
}
