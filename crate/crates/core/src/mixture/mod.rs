//! Two-model cluster-number selection.
//!
//! A Gaussian mixture `p` is fitted by EM, a Gaussian kernel density `q` is
//! built on the same samples with its bandwidth fixed by the mixture
//! posterior, and the number of components minimizing `KL[q ‖ p]` wins.

mod bandwidth;
mod dataset;
mod gaussian;
mod gmm;
mod kde;
mod kl;
mod select;

pub use bandwidth::{
    estimate_bandwidth, jacobian_term, silverman_h0_sq, BandwidthEstimate, BandwidthMap, BandwidthOptions,
    FixedPointMethod,
};
pub use dataset::Dataset;
pub use gmm::{fit_gmm_em, responsibilities, EmFit, EmInit, EmOptions, GmmModel};
pub use kde::{kde_density, KdeModel};
pub use kl::{kl_free_energy, KlEstimate, McOptions, MIN_MC_SAMPLES};
pub use select::{select_cluster_number, validate_range, KRecord, SelectOptions, SelectionReport};
