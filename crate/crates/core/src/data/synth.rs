use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fnn::SupervisedSet;
use crate::mixture::Dataset;
use crate::rng::{derive_seed, rng_from_seed};
use nalgebra::DMatrix;

/// Isotropic Gaussian blobs with centers on a shuffled, scaled integer lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlobSpec {
    pub k: usize,
    pub per_cluster_n: usize,
    pub dim: usize,
    /// Minimum center distance in units of `sigma`.
    pub separation: f64,
    pub sigma: f64,
    pub seed: u64,
}

impl Default for BlobSpec {
    fn default() -> Self {
        Self {
            k: 3,
            per_cluster_n: 150,
            dim: 2,
            separation: 8.0,
            sigma: 0.1,
            seed: 0,
        }
    }
}

impl BlobSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.per_cluster_n == 0 || self.dim == 0 {
            return Err(Error::invalid("blob spec needs k, per_cluster_n and dim >= 1"));
        }
        if !(self.separation.is_finite() && self.separation > 0.0) || !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::invalid("blob separation and sigma must be positive"));
        }
        if lattice_side(self.k, self.dim)
            .checked_pow(self.dim as u32)
            .is_none_or(|c| c > 1 << 24)
        {
            return Err(Error::invalid("too many lattice sites for this k and dim"));
        }
        Ok(())
    }

    /// Cluster centers, in label order.
    pub fn centers(&self) -> Result<Vec<Vec<f64>>> {
        self.validate()?;
        let side = lattice_side(self.k, self.dim);
        let sites = side.pow(self.dim as u32);
        let mut order: Vec<usize> = (0..sites).collect();
        order.shuffle(&mut rng_from_seed(derive_seed(self.seed, &["blobs", "centers"])));
        let step = self.separation * self.sigma;
        let mid = (side - 1) as f64 / 2.0;
        Ok(order[..self.k]
            .iter()
            .map(|&site| {
                let mut rest = site;
                (0..self.dim)
                    .map(|_| {
                        let c = rest % side;
                        rest /= side;
                        (c as f64 - mid) * step
                    })
                    .collect()
            })
            .collect())
    }
}

fn lattice_side(k: usize, dim: usize) -> usize {
    let mut side = 1usize;
    while side.checked_pow(dim as u32).is_some_and(|c| c < k) {
        side += 1;
    }
    side
}

pub fn gen_blobs(spec: &BlobSpec) -> Result<Dataset> {
    let centers = spec.centers()?;
    let mut rng = rng_from_seed(derive_seed(spec.seed, &["blobs", "draws"]));
    let n = spec.k * spec.per_cluster_n;
    let mut values = Vec::with_capacity(n * spec.dim);
    let mut labels = Vec::with_capacity(n);
    for (label, c) in centers.iter().enumerate() {
        for _ in 0..spec.per_cluster_n {
            for &m in c {
                let z: f64 = StandardNormal.sample(&mut rng);
                values.push(m + spec.sigma * z);
            }
            labels.push(label);
        }
    }
    Dataset::from_flat(n, spec.dim, values)?.with_labels(labels)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressionFn {
    /// `sin(x)/x`, 1 at the origin.
    #[default]
    Sinc,
    /// `2x + 1`
    Linear,
    Sine,
}

impl RegressionFn {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            RegressionFn::Sinc if x == 0.0 => 1.0,
            RegressionFn::Sinc => x.sin() / x,
            RegressionFn::Linear => 2.0 * x + 1.0,
            RegressionFn::Sine => x.sin(),
        }
    }
}

/// `z = f(x) + N(0, noise_sigma²)` with `x` uniform on `domain`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegressionSpec {
    #[serde(rename = "fn")]
    pub function: RegressionFn,
    pub n: usize,
    pub domain: [f64; 2],
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for RegressionSpec {
    fn default() -> Self {
        Self {
            function: RegressionFn::Sinc,
            n: 50,
            domain: [-3.0, 3.0],
            noise_sigma: 0.1,
            seed: 0,
        }
    }
}

impl RegressionSpec {
    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.domain;
        if self.n == 0 {
            return Err(Error::invalid("regression needs n >= 1"));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(format!(
                "regression domain [{lo}, {hi}] must satisfy lo < hi"
            )));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::invalid("noise_sigma must be >= 0"));
        }
        Ok(())
    }
}

pub fn gen_regression(spec: &RegressionSpec) -> Result<SupervisedSet> {
    spec.validate()?;
    let mut xr = rng_from_seed(derive_seed(spec.seed, &["regression", "x"]));
    let mut nr = rng_from_seed(derive_seed(spec.seed, &["regression", "noise"]));
    let dist = Uniform::new(spec.domain[0], spec.domain[1]).map_err(|e| Error::invalid(e.to_string()))?;
    let x: Vec<f64> = (0..spec.n).map(|_| dist.sample(&mut xr)).collect();
    let z: Vec<f64> = x
        .iter()
        .map(|&x| {
            let e: f64 = StandardNormal.sample(&mut nr);
            spec.function.eval(x) + spec.noise_sigma * e
        })
        .collect();
    SupervisedSet::new(DMatrix::from_vec(spec.n, 1, x), DMatrix::from_vec(spec.n, 1, z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixture::Dataset;

    fn min_center_distance(c: &[Vec<f64>]) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..c.len() {
            for j in i + 1..c.len() {
                let d: f64 = c[i].iter().zip(&c[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                best = best.min(d);
            }
        }
        best
    }

    #[test]
    fn single_blob_mean_near_center() {
        let spec = BlobSpec {
            k: 1,
            per_cluster_n: 1000,
            sigma: 0.5,
            ..Default::default()
        };
        let d = gen_blobs(&spec).unwrap();
        let c = &spec.centers().unwrap()[0];
        let m = d.mean();
        for j in 0..2 {
            assert!((m[j] - c[j]).abs() < 4.0 * 0.5 / (1000f64).sqrt());
        }
    }

    #[test]
    fn centers_respect_separation() {
        for (k, dim) in [(3, 2), (5, 2), (4, 3), (7, 1)] {
            let spec = BlobSpec {
                k,
                dim,
                separation: 8.0,
                sigma: 0.3,
                ..Default::default()
            };
            let c = spec.centers().unwrap();
            assert!(min_center_distance(&c) >= 8.0 * 0.3 - 1e-12);
        }
    }

    #[test]
    fn blobs_are_deterministic_with_full_labels() {
        let spec = BlobSpec {
            seed: 5,
            ..Default::default()
        };
        let a: Dataset = gen_blobs(&spec).unwrap();
        assert_eq!(a, gen_blobs(&spec).unwrap());
        let mut seen = [false; 3];
        a.labels().unwrap().iter().for_each(|&l| seen[l] = true);
        assert!(seen.iter().all(|s| *s));
        assert_ne!(a, gen_blobs(&BlobSpec { seed: 6, ..spec }).unwrap());
    }

    #[test]
    fn noiseless_regression_is_exact() {
        let spec = RegressionSpec {
            noise_sigma: 0.0,
            function: RegressionFn::Sine,
            ..Default::default()
        };
        let s = gen_regression(&spec).unwrap();
        for i in 0..s.len() {
            assert_eq!(s.targets()[(i, 0)], s.inputs()[(i, 0)].sin());
        }
        assert_eq!(s, gen_regression(&spec).unwrap());
    }

    #[test]
    fn noise_level_matches() {
        let spec = RegressionSpec {
            n: 10_000,
            noise_sigma: 0.1,
            ..Default::default()
        };
        let s = gen_regression(&spec).unwrap();
        let r: Vec<f64> = (0..s.len())
            .map(|i| s.targets()[(i, 0)] - RegressionFn::Sinc.eval(s.inputs()[(i, 0)]))
            .collect();
        let (_, var) = crate::numeric::mean_var(&r);
        let sd = var.sqrt();
        assert!((0.095..=0.105).contains(&sd), "{sd}");
    }

    #[test]
    fn invalid_specs() {
        assert!(BlobSpec {
            k: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(RegressionSpec {
            domain: [1.0, 1.0],
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
