//! Monte Carlo estimate of `KL[q ‖ p] = ∫ q ln q − ∫ q ln p`.
//!
//! `q` is the kernel model, `p` the mixture. Sampling `q` is exact, so the
//! estimator is unbiased; its mean is also the negative evidence lower bound
//! up to the log-evidence constant.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gmm::{GmmModel, MixtureEval};
use super::kde::{log_kde, KdeModel};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Below this many draws the standard error is too unreliable to back the
/// `≥ −3·SE` contract.
pub const MIN_MC_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    pub samples: usize,
    pub seed: u64,
}

impl Default for McOptions {
    fn default() -> Self {
        Self { samples: 4000, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KlEstimate {
    pub kl_estimate: f64,
    pub std_error: f64,
    pub samples: usize,
}

pub fn kl_free_energy(kde: &KdeModel, model: &GmmModel, mc: &McOptions) -> Result<KlEstimate> {
    Error::check_dim("KL models", kde.dim(), model.dim())?;
    if mc.samples < MIN_MC_SAMPLES {
        return Err(Error::invalid(format!(
            "KL estimate needs at least {MIN_MC_SAMPLES} samples, got {}",
            mc.samples
        )));
    }
    // draws are generated sequentially so they depend only on the seed
    let mut rng = rng_from_seed(mc.seed);
    let draws: Vec<Vec<f64>> = (0..mc.samples).map(|_| kde.sample(&mut rng)).collect();

    let eval = MixtureEval::new(model)?;
    let centers = kde.centers();
    let h_sq = kde.bandwidth_sq();
    let terms: Vec<f64> = draws
        .par_iter()
        .map_init(
            || eval.buffers(),
            |buf, s| log_kde(centers, h_sq, s) - eval.log_pdf(s, buf),
        )
        .collect();

    let m = terms.len() as f64;
    let mean = terms.iter().sum::<f64>() / m;
    let var = terms.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (m - 1.0);
    Ok(KlEstimate {
        kl_estimate: mean,
        std_error: (var / m).sqrt(),
        samples: mc.samples,
    })
}
