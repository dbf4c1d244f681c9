//! Single-hidden-layer networks trained with a Jacobian penalty.

mod loss;
mod model;
mod pil;
mod train;

pub use loss::{
    contractive_ae_loss, default_reg_prefactor, estimate_reg_param, estimate_reg_param_with, loss_regularized,
    objective_gradient, residual_curvature, LossBreakdown, SlfnGradient, SupervisedSet,
};
pub use model::{forward, input_jacobian, Activation, SlfnModel, WeightScheme};
pub use pil::{train_pil, PilOptions};
pub use train::{train_gd, GdOptions, GdOutcome, HMode};
