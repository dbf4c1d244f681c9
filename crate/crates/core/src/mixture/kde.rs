use std::f64::consts::PI;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::dataset::{sq_dist, Dataset};
use crate::error::{Error, Result};
use crate::numeric::LogSumExp;
use crate::rng::Rng;

/// Isotropic Gaussian kernel density `q(x) = (1/N) Σ_i N(x | x_i, h² I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KdeModel {
    centers: Dataset,
    bandwidth_sq: f64,
}

impl KdeModel {
    pub fn new(centers: Dataset, bandwidth_sq: f64) -> Result<Self> {
        if !(bandwidth_sq.is_finite() && bandwidth_sq > 0.0) {
            return Err(Error::invalid(format!(
                "kernel bandwidth h^2 = {bandwidth_sq} must be positive"
            )));
        }
        Ok(Self { centers, bandwidth_sq })
    }

    pub fn centers(&self) -> &Dataset {
        &self.centers
    }

    pub fn bandwidth_sq(&self) -> f64 {
        self.bandwidth_sq
    }

    pub fn dim(&self) -> usize {
        self.centers.dim()
    }

    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        Error::check_dim("kernel density", self.dim(), x.len())?;
        Ok(log_kde(&self.centers, self.bandwidth_sq, x))
    }

    /// Draws one point: a uniformly chosen center plus `N(0, h² I)` noise.
    pub fn sample(&self, rng: &mut Rng) -> Vec<f64> {
        use rand::Rng as _;
        let i = rng.random_range(0..self.centers.len());
        let h = self.bandwidth_sq.sqrt();
        self.centers
            .row(i)
            .iter()
            .map(|c| {
                let z: f64 = StandardNormal.sample(rng);
                c + h * z
            })
            .collect()
    }
}

pub fn kde_density(kde: &KdeModel, x: &[f64]) -> Result<f64> {
    kde.log_density(x).map(f64::exp)
}

pub(crate) fn log_kde(centers: &Dataset, h_sq: f64, x: &[f64]) -> f64 {
    let n = centers.len() as f64;
    let d = centers.dim() as f64;
    let mut acc = LogSumExp::default();
    for c in centers.rows() {
        acc.push(-sq_dist(x, c) / (2.0 * h_sq));
    }
    acc.value() - n.ln() - 0.5 * d * (2.0 * PI * h_sq).ln()
}

#[derive(Serialize)]
struct KdeRepr<'a> {
    bandwidth_sq: f64,
    centers: Vec<&'a [f64]>,
}

impl Serialize for KdeModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        KdeRepr {
            bandwidth_sq: self.bandwidth_sq,
            centers: self.centers.rows().collect(),
        }
        .serialize(s)
    }
}

#[derive(Deserialize)]
struct KdeOwned {
    bandwidth_sq: f64,
    centers: Vec<Vec<f64>>,
}

impl<'de> Deserialize<'de> for KdeModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = KdeOwned::deserialize(d)?;
        let centers = Dataset::from_rows(&raw.centers).map_err(D::Error::custom)?;
        KdeModel::new(centers, raw.bandwidth_sq).map_err(D::Error::custom)
    }
}
