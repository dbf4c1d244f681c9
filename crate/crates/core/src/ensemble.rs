//! Canonical-ensemble thermodynamics over a finite set of energy levels.
//!
//! With degeneracies `Ω_i` and inverse temperature `β = 1/(k_B T)`:
//!
//! ```text
//! Z   = Σ_i Ω_i exp(-β E_i)
//! p_i = Ω_i exp(-β E_i) / Z
//! F   = -k_B T ln Z
//! S   = (<E> - F) / T
//! ```
//!
//! Every exponential sum goes through a max-shifted log-sum-exp.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::log_sum_exp;

fn default_kb() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub energies: Vec<f64>,
    pub degeneracies: Vec<f64>,
    pub beta: f64,
    #[serde(default = "default_kb", rename = "k_b")]
    pub k_b: f64,
}

impl EnsembleSpec {
    /// Non-degenerate spectrum in natural units (`k_B = 1`).
    pub fn new(energies: Vec<f64>, beta: f64) -> Self {
        let degeneracies = vec![1.0; energies.len()];
        Self {
            energies,
            degeneracies,
            beta,
            k_b: 1.0,
        }
    }

    pub fn with_degeneracies(mut self, degeneracies: Vec<f64>) -> Self {
        self.degeneracies = degeneracies;
        self
    }

    pub fn temperature(&self) -> f64 {
        1.0 / (self.k_b * self.beta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.energies.is_empty() {
            return Err(Error::invalid("energy spectrum is empty"));
        }
        Error::check_dim("degeneracies", self.energies.len(), self.degeneracies.len())?;
        if let Some(e) = self.energies.iter().find(|e| !e.is_finite()) {
            return Err(Error::invalid(format!("energy level {e} is not finite")));
        }
        if let Some((i, g)) = self
            .degeneracies
            .iter()
            .enumerate()
            .find(|(_, g)| !(g.is_finite() && **g > 0.0))
        {
            return Err(Error::invalid(format!(
                "degeneracy {g} at level {i} must be strictly positive"
            )));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::invalid(format!(
                "inverse temperature beta = {} must be positive",
                self.beta
            )));
        }
        if !(self.k_b.is_finite() && self.k_b > 0.0) {
            return Err(Error::invalid(format!(
                "Boltzmann constant k_b = {} must be positive",
                self.k_b
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermoReport {
    pub partition_z: f64,
    /// `ln Z`, finite even when `partition_z` over- or underflows.
    pub log_partition: f64,
    pub free_energy: f64,
    pub mean_energy: f64,
    pub entropy: f64,
    pub probabilities: Vec<f64>,
}

pub fn compute_thermodynamics(spec: &EnsembleSpec) -> Result<ThermoReport> {
    spec.validate()?;
    let beta = spec.beta;
    let log_weights: Vec<f64> = spec
        .energies
        .iter()
        .zip(&spec.degeneracies)
        .map(|(&e, &g)| g.ln() - beta * e)
        .collect();
    let log_z = log_sum_exp(&log_weights);

    let mut probabilities: Vec<f64> = log_weights.iter().map(|&w| (w - log_z).exp()).collect();
    let total: f64 = probabilities.iter().sum();
    probabilities.iter_mut().for_each(|p| *p /= total);

    let free_energy = -log_z / beta;
    let mean_energy: f64 = probabilities.iter().zip(&spec.energies).map(|(p, e)| p * e).sum();
    let entropy = (mean_energy - free_energy) * spec.k_b * beta;

    Ok(ThermoReport {
        partition_z: log_z.exp(),
        log_partition: log_z,
        free_energy,
        mean_energy,
        entropy,
        probabilities,
    })
}

/// Soft minimum `-(1/β) ln Σ_i exp(-β E_i)` of a finite energy set.
///
/// Always lies in `[min E - ln(M)/β, min E]`.
pub fn ensemble_free_energy(energies: &[f64], beta: f64) -> Result<f64> {
    if energies.is_empty() {
        return Err(Error::invalid("energy set is empty"));
    }
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::invalid(format!("beta = {beta} must be positive")));
    }
    if energies.iter().any(|e| !e.is_finite()) {
        return Err(Error::invalid("energies must be finite"));
    }
    let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    // factor out the ground state so the remaining sum is >= 1
    let tail: f64 = energies.iter().map(|&e| (-beta * (e - min)).exp()).sum();
    Ok(min - tail.ln() / beta)
}
