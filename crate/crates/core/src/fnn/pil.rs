//! Pseudoinverse learning: random hidden layer, ridge-solved output layer.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::loss::SupervisedSet;
use super::model::{Activation, SlfnModel, WeightScheme};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PilOptions {
    pub seed: u64,
    pub weight_scheme: WeightScheme,
    pub activation: Activation,
}

/// Output weights minimize `‖A Wᵀ − Z‖² + h‖W‖²`; `h = 0` gives the
/// minimum-norm least-squares solution.
pub fn train_pil(data: &SupervisedSet, hidden_size: usize, h: f64, opts: &PilOptions) -> Result<SlfnModel> {
    if hidden_size == 0 {
        return Err(Error::invalid("hidden_size must be at least 1"));
    }
    if !(h.is_finite() && h >= 0.0) {
        return Err(Error::invalid(format!("regularization parameter h = {h} must be >= 0")));
    }
    let d = data.input_dim();
    let (w_in, b_in) = opts.weight_scheme.draw(hidden_size, d, opts.seed);
    let mut model = SlfnModel::new(
        w_in,
        b_in,
        DMatrix::zeros(data.target_dim(), hidden_size),
        DVector::zeros(data.target_dim()),
        opts.activation,
    )?;

    let mut a = DMatrix::zeros(data.len(), hidden_size);
    for i in 0..data.len() {
        let hid = model.hidden(&data.input(i));
        a.set_row(i, &hid.act.transpose());
    }

    let svd = a.svd(true, true);
    let u = svd.u.as_ref().expect("U requested");
    let v_t = svd.v_t.as_ref().expect("Vᵀ requested");
    let s = &svd.singular_values;
    let s_max = s.max();
    let cutoff = f64::EPSILON * data.len().max(hidden_size) as f64 * s_max;
    let filt = DVector::from_iterator(
        s.len(),
        s.iter().map(|&si| {
            if h > 0.0 {
                si / (si * si + h)
            } else if si > cutoff {
                1.0 / si
            } else {
                0.0
            }
        }),
    );
    let mut ut_z = u.transpose() * data.targets();
    for (r, f) in filt.iter().enumerate() {
        ut_z.row_mut(r).scale_mut(*f);
    }
    let w_t = v_t.transpose() * ut_z; // H × m
    model.w_out = w_t.transpose();
    Ok(model)
}
