//! Cluster-number selection by minimum KL free energy.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bandwidth::{estimate_bandwidth, BandwidthOptions};
use super::dataset::Dataset;
use super::gmm::{fit_gmm_em, EmInit, EmOptions};
use super::kde::KdeModel;
use super::kl::{kl_free_energy, McOptions};
use crate::error::{Error, Result};
use crate::rng::{derive_indexed, derive_seed};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectOptions {
    pub seed: u64,
    pub restarts: usize,
    pub mc_samples: usize,
    pub em_max_iter: usize,
    pub em_tol: f64,
    pub cov_floor: f64,
    pub em_init: EmInit,
    pub bandwidth: BandwidthOptions,
}

impl Default for SelectOptions {
    fn default() -> Self {
        let em = EmOptions::default();
        Self {
            seed: 0,
            restarts: em.restarts,
            mc_samples: McOptions::default().samples,
            em_max_iter: em.max_iter,
            em_tol: em.tol,
            cov_floor: em.cov_floor,
            em_init: em.init,
            bandwidth: BandwidthOptions::default(),
        }
    }
}

impl SelectOptions {
    /// EM settings used for `k` components during selection.
    pub fn em_for(&self, k: usize) -> EmOptions {
        EmOptions {
            max_iter: self.em_max_iter,
            tol: self.em_tol,
            restarts: self.restarts,
            seed: derive_indexed(self.seed, &["gmm-select", "em"], k as u64),
            cov_floor: self.cov_floor,
            init: self.em_init,
            ..EmOptions::default()
        }
    }

    /// One MC stream shared by every `k`, so the comparison across `k` is paired.
    pub fn mc(&self) -> McOptions {
        McOptions {
            samples: self.mc_samples,
            seed: derive_seed(self.seed, &["gmm-select", "mc"]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KRecord {
    pub k: usize,
    pub converged_loglik: f64,
    pub em_converged: bool,
    pub em_restart_used: usize,
    pub h_sq: f64,
    pub bandwidth_converged: bool,
    pub bandwidth_degenerate: bool,
    /// Scale diagnostics of the bandwidth estimate (see `BandwidthEstimate`).
    pub mean_density: f64,
    pub nn_ratio: f64,
    pub kl_estimate: f64,
    pub kl_std_error: f64,
    /// Set when this `k` could not be evaluated; such rows never win.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub per_k: Vec<KRecord>,
    pub chosen_k: usize,
}

pub fn validate_range(n: usize, k_min: usize, k_max: usize) -> Result<()> {
    if k_min < 1 || k_min > k_max {
        return Err(Error::invalid(format!(
            "cluster range must satisfy 1 <= k_min <= k_max (got {k_min}..{k_max})"
        )));
    }
    if k_max > n {
        return Err(Error::invalid(format!(
            "k_max = {k_max} exceeds the number of samples {n}"
        )));
    }
    Ok(())
}

fn evaluate_k(data: &Dataset, k: usize, opts: &SelectOptions) -> KRecord {
    let failed = |msg: String| KRecord {
        k,
        converged_loglik: f64::NAN,
        em_converged: false,
        em_restart_used: 0,
        h_sq: f64::NAN,
        bandwidth_converged: false,
        bandwidth_degenerate: false,
        mean_density: f64::NAN,
        nn_ratio: f64::NAN,
        kl_estimate: f64::NAN,
        kl_std_error: f64::NAN,
        failure: Some(msg),
    };
    let fit = match fit_gmm_em(data, k, &opts.em_for(k)) {
        Ok(f) => f,
        Err(e) => return failed(format!("EM: {e}")),
    };
    let bw = match estimate_bandwidth(data, &fit.model, &opts.bandwidth) {
        Ok(b) => b,
        Err(e) => return failed(format!("bandwidth: {e}")),
    };
    let kl = KdeModel::new(data.clone(), bw.h_sq).and_then(|kde| kl_free_energy(&kde, &fit.model, &opts.mc()));
    let kl = match kl {
        Ok(kl) => kl,
        Err(e) => return failed(format!("KL: {e}")),
    };
    KRecord {
        k,
        converged_loglik: fit.final_loglik(),
        em_converged: fit.converged,
        em_restart_used: fit.restart,
        h_sq: bw.h_sq,
        bandwidth_converged: bw.converged,
        bandwidth_degenerate: bw.degenerate,
        mean_density: bw.mean_density,
        nn_ratio: bw.nn_ratio,
        kl_estimate: kl.kl_estimate,
        kl_std_error: kl.std_error,
        failure: None,
    }
}

pub fn select_cluster_number(
    data: &Dataset,
    k_min: usize,
    k_max: usize,
    opts: &SelectOptions,
) -> Result<SelectionReport> {
    validate_range(data.len(), k_min, k_max)?;
    if opts.mc_samples < super::kl::MIN_MC_SAMPLES {
        return Err(Error::invalid(format!(
            "mc_samples = {} is below the minimum {}",
            opts.mc_samples,
            super::kl::MIN_MC_SAMPLES
        )));
    }
    let per_k: Vec<KRecord> = (k_min..=k_max)
        .into_par_iter()
        .map(|k| evaluate_k(data, k, opts))
        .collect();

    // strict `<` keeps the smaller k on ties
    let chosen = per_k
        .iter()
        .filter(|r| r.failure.is_none() && r.kl_estimate.is_finite())
        .fold(None::<&KRecord>, |best, r| match best {
            Some(b) if b.kl_estimate <= r.kl_estimate => Some(b),
            _ => Some(r),
        })
        .map(|r| r.k);
    let Some(chosen_k) = chosen else {
        let reasons: Vec<String> = per_k.iter().filter_map(|r| r.failure.clone()).collect();
        return Err(Error::Degenerate(format!(
            "no cluster number could be evaluated: {}",
            reasons.join("; ")
        )));
    };
    Ok(SelectionReport { per_k, chosen_k })
}
