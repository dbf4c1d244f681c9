//! Explicit finite-difference reaction-diffusion: a 1-D gradient flow with its
//! free-energy functional and a 2-D two-species system with pluggable kinetics.

mod grid;
mod one_d;
mod sim;
mod two_d;

pub use grid::{pattern_metric, Grid};
pub use one_d::{free_energy_1d, stability_bound_1d, step_gradient_flow_1d, Boundary, Field1D, Potential};
pub use sim::{simulate_1d, simulate_2d, Run1D, Run2D, Snapshot2D, StepControl, TracePoint};
pub use two_d::{seeded_square, stability_bound_2d, step_turing_2d, GrayScott, Kinetics, RdState2D};

use crate::error::{Error, Result};

pub(crate) fn check_dt(dt: f64, bound: f64) -> Result<()> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid(format!("time step must be positive, got {dt}")));
    }
    if dt > bound {
        return Err(Error::StabilityBound { dt, bound });
    }
    Ok(())
}

pub(crate) fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive, got {v}")))
    }
}
