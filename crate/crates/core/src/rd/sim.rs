//! Step drivers that record snapshots and a metric trace.

use serde::{Deserialize, Serialize};

use super::grid::{pattern_metric, Grid};
use super::one_d::{free_energy_1d, stability_bound_1d, step_gradient_flow_1d, Field1D, Potential};
use super::two_d::{step_checked, Kinetics, RdState2D};
use super::{check_dt, check_positive};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    pub dt: f64,
    pub steps: usize,
    pub snapshot_every: usize,
}

impl StepControl {
    fn validate(&self) -> Result<()> {
        if self.snapshot_every == 0 {
            return Err(Error::invalid("snapshot_every must be at least 1"));
        }
        Ok(())
    }

    fn is_snapshot(&self, step: usize) -> bool {
        step.is_multiple_of(self.snapshot_every) || step == self.steps
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub step: usize,
    pub time: f64,
    pub metric: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Run1D {
    pub snapshots: Vec<(usize, Field1D)>,
    /// Free energy at each snapshot.
    pub trace: Vec<TracePoint>,
    pub final_field: Field1D,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot2D {
    pub step: usize,
    pub time: f64,
    pub u: Grid,
    pub v: Grid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Run2D<K = super::GrayScott> {
    pub snapshots: Vec<Snapshot2D>,
    /// Pattern metric of `v` at each snapshot.
    pub trace: Vec<TracePoint>,
    pub final_state: RdState2D<K>,
}

/// Snapshots are taken at step 0, every `snapshot_every` steps, and at the last step.
pub fn simulate_1d(field: &Field1D, d: f64, potential: Potential, ctrl: &StepControl) -> Result<Run1D> {
    field.validate()?;
    ctrl.validate()?;
    check_positive("diffusion coefficient", d)?;
    check_dt(ctrl.dt, stability_bound_1d(field.dx, d))?;
    let mut snapshots = Vec::new();
    let mut trace = Vec::new();
    let mut record = |step: usize, f: &Field1D| {
        trace.push(TracePoint {
            step,
            time: f.time,
            metric: free_energy_1d(f, d, potential),
        });
        snapshots.push((step, f.clone()));
    };
    let mut cur = field.clone();
    record(0, &cur);
    for step in 1..=ctrl.steps {
        cur = step_gradient_flow_1d(&cur, d, potential, ctrl.dt).map_err(|e| match e {
            Error::NonFinite { .. } => Error::NonFinite { step },
            e => e,
        })?;
        if ctrl.is_snapshot(step) {
            record(step, &cur);
        }
    }
    Ok(Run1D {
        snapshots,
        trace,
        final_field: cur,
    })
}

pub fn simulate_2d<K: Kinetics + Clone>(state: &RdState2D<K>, ctrl: &StepControl) -> Result<Run2D<K>> {
    state.validate()?;
    ctrl.validate()?;
    check_dt(ctrl.dt, state.stability_bound())?;
    let mut snapshots = Vec::new();
    let mut trace = Vec::new();
    let mut record = |step: usize, s: &RdState2D<K>| {
        trace.push(TracePoint {
            step,
            time: s.time,
            metric: pattern_metric(&s.v),
        });
        snapshots.push(Snapshot2D {
            step,
            time: s.time,
            u: s.u.clone(),
            v: s.v.clone(),
        });
    };
    let mut cur = state.clone();
    record(0, &cur);
    for step in 1..=ctrl.steps {
        cur = step_checked(&cur, ctrl.dt, step)?;
        if ctrl.is_snapshot(step) {
            record(step, &cur);
        }
    }
    Ok(Run2D {
        snapshots,
        trace,
        final_state: cur,
    })
}
