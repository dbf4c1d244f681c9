//! One-component gradient flow `∂φ/∂t = D ∂²φ/∂x² + R(φ)` with
//! `𝓕[φ] = ∫ [D/2 (∂φ/∂x)² − V(φ)] dx` and `R = dV/dφ`.
//!
//! The discrete energy uses forward differences between neighbouring nodes and
//! trapezoid node weights, which makes the explicit Euler update an exact
//! discrete gradient step of `𝓕`.

use serde::{Deserialize, Serialize};

use super::{check_dt, check_positive};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Periodic,
    /// Zero-flux ends, by reflection.
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Potential {
    #[default]
    Zero,
    /// `V = φ²/2 − φ⁴/4`, so `R = φ − φ³`.
    AllenCahn,
}

impl Potential {
    pub fn value(self, phi: f64) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::AllenCahn => {
                let p2 = phi * phi;
                0.5 * p2 - 0.25 * p2 * p2
            }
        }
    }

    pub fn reaction(self, phi: f64) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::AllenCahn => phi - phi * phi * phi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field1D {
    pub values: Vec<f64>,
    pub dx: f64,
    pub boundary: Boundary,
    pub time: f64,
}

impl Field1D {
    pub fn new(values: Vec<f64>, dx: f64, boundary: Boundary) -> Result<Self> {
        let f = Self {
            values,
            dx,
            boundary,
            time: 0.0,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() < 3 {
            return Err(Error::invalid(format!(
                "1-D field needs at least 3 points, got {}",
                self.values.len()
            )));
        }
        check_positive("dx", self.dx)?;
        if !self.values.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("1-D field contains non-finite values"));
        }
        if !(self.time.is_finite() && self.time >= 0.0) {
            return Err(Error::invalid("field time must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Domain length: `n·dx` when periodic, `(n−1)·dx` between Neumann end nodes.
    pub fn domain_length(&self) -> f64 {
        match self.boundary {
            Boundary::Periodic => self.values.len() as f64 * self.dx,
            Boundary::Neumann => (self.values.len() - 1) as f64 * self.dx,
        }
    }

    fn node_weight(&self, i: usize) -> f64 {
        match self.boundary {
            Boundary::Neumann if i == 0 || i + 1 == self.values.len() => 0.5,
            _ => 1.0,
        }
    }

    pub(crate) fn laplacian(&self) -> Vec<f64> {
        let n = self.values.len();
        let phi = &self.values;
        let inv = 1.0 / (self.dx * self.dx);
        (0..n)
            .map(|i| {
                let (l, r) = match self.boundary {
                    Boundary::Periodic => (phi[(i + n - 1) % n], phi[(i + 1) % n]),
                    Boundary::Neumann => {
                        let l = if i == 0 { phi[1] } else { phi[i - 1] };
                        let r = if i + 1 == n { phi[n - 2] } else { phi[i + 1] };
                        (l, r)
                    }
                };
                (l - 2.0 * phi[i] + r) * inv
            })
            .collect()
    }
}

/// `dx² / (2D)`.
pub fn stability_bound_1d(dx: f64, d: f64) -> f64 {
    dx * dx / (2.0 * d)
}

pub fn free_energy_1d(field: &Field1D, d: f64, potential: Potential) -> f64 {
    let n = field.values.len();
    let phi = &field.values;
    let edges = match field.boundary {
        Boundary::Periodic => n,
        Boundary::Neumann => n - 1,
    };
    let gradient: f64 = (0..edges)
        .map(|i| {
            let g = (phi[(i + 1) % n] - phi[i]) / field.dx;
            g * g
        })
        .sum();
    let well: f64 = (0..n).map(|i| field.node_weight(i) * potential.value(phi[i])).sum();
    (0.5 * d * gradient - well) * field.dx
}

pub fn step_gradient_flow_1d(field: &Field1D, d: f64, potential: Potential, dt: f64) -> Result<Field1D> {
    field.validate()?;
    check_positive("diffusion coefficient", d)?;
    check_dt(dt, stability_bound_1d(field.dx, d))?;
    let lap = field.laplacian();
    let values: Vec<f64> = field
        .values
        .iter()
        .zip(&lap)
        .map(|(&p, &l)| p + dt * (d * l + potential.reaction(p)))
        .collect();
    if !values.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite { step: 1 });
    }
    Ok(Field1D {
        values,
        dx: field.dx,
        boundary: field.boundary,
        time: field.time + dt,
    })
}
