//! Gaussian mixture fitted by expectation-maximization.
//!
//! The E-step posterior `q(z = k | x) = α_k N(x | μ_k, Σ_k) / p(x)` is what the
//! bandwidth update and the cluster-number search consume; the M-step is the
//! usual maximum-likelihood update with a covariance floor.

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::dataset::{sq_dist, Dataset};
use super::gaussian::Gaussian;
use crate::error::{Error, Result};
use crate::numeric::log_sum_exp;
use crate::rng::{derive_indexed, rng_from_seed, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "GmmRepr", try_from = "GmmRepr")]
pub struct GmmModel {
    weights: Vec<f64>,
    means: Vec<DVector<f64>>,
    covariances: Vec<DMatrix<f64>>,
}

impl GmmModel {
    pub fn new(weights: Vec<f64>, means: Vec<DVector<f64>>, covariances: Vec<DMatrix<f64>>) -> Result<Self> {
        let k = weights.len();
        if k == 0 {
            return Err(Error::invalid("mixture needs at least one component"));
        }
        Error::check_dim("mixture means", k, means.len())?;
        Error::check_dim("mixture covariances", k, covariances.len())?;
        let d = means[0].len();
        for (m, c) in means.iter().zip(&covariances) {
            Error::check_dim("component mean", d, m.len())?;
            Error::check_dim("component covariance rows", d, c.nrows())?;
            Error::check_dim("component covariance cols", d, c.ncols())?;
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::invalid("mixture weights must be positive"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("mixture weights sum to {total}, not 1")));
        }
        Ok(Self {
            weights,
            means,
            covariances,
        })
    }

    /// Mixture of isotropic components sharing one variance.
    pub fn isotropic(weights: Vec<f64>, means: Vec<DVector<f64>>, variance: f64) -> Result<Self> {
        let d = means.first().map_or(0, DVector::len);
        let covs = vec![DMatrix::identity(d, d) * variance; means.len()];
        Self::new(weights, means, covs)
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.means[0].len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &[DVector<f64>] {
        &self.means
    }

    pub fn covariances(&self) -> &[DMatrix<f64>] {
        &self.covariances
    }

    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        Error::check_dim("mixture density", self.dim(), x.len())?;
        let eval = MixtureEval::new(self)?;
        let mut buf = eval.buffers();
        Ok(eval.log_pdf(x, &mut buf))
    }

    /// Total log-likelihood of `data`.
    pub fn log_likelihood(&self, data: &Dataset) -> Result<f64> {
        Error::check_dim("mixture vs data", self.dim(), data.dim())?;
        let eval = MixtureEval::new(self)?;
        let mut buf = eval.buffers();
        Ok(data.rows().map(|x| eval.log_pdf(x, &mut buf)).sum())
    }

    /// Check the model invariants: normalized positive weights, symmetric
    /// covariances whose smallest eigenvalue is at least `floor`.
    pub fn check_invariants(&self, floor: f64) -> Result<()> {
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 || self.weights.iter().any(|w| *w <= 0.0) {
            return Err(Error::Degenerate(format!("weights sum to {total}")));
        }
        for (k, c) in self.covariances.iter().enumerate() {
            let asym = (c - c.transpose()).abs().max();
            if asym > 1e-12 {
                return Err(Error::Degenerate(format!("covariance {k} asymmetric by {asym}")));
            }
            let min_eig = c.clone().symmetric_eigenvalues().min();
            if min_eig < floor * (1.0 - 1e-9) {
                return Err(Error::Degenerate(format!(
                    "covariance {k} smallest eigenvalue {min_eig} below floor {floor}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct GmmRepr {
    weights: Vec<f64>,
    means: Vec<Vec<f64>>,
    covariances: Vec<Vec<Vec<f64>>>,
}

impl From<GmmModel> for GmmRepr {
    fn from(m: GmmModel) -> Self {
        Self {
            weights: m.weights,
            means: m.means.iter().map(|v| v.iter().copied().collect()).collect(),
            covariances: m
                .covariances
                .iter()
                .map(|c| c.row_iter().map(|r| r.iter().copied().collect()).collect())
                .collect(),
        }
    }
}

impl TryFrom<GmmRepr> for GmmModel {
    type Error = Error;

    fn try_from(r: GmmRepr) -> Result<Self> {
        let means = r.means.into_iter().map(DVector::from_vec).collect();
        let covariances = r
            .covariances
            .iter()
            .map(|rows| {
                let d = rows.len();
                DMatrix::from_row_slice(d, d, &rows.concat())
            })
            .collect();
        GmmModel::new(r.weights, means, covariances)
    }
}

/// Prepared mixture: cached factorizations and log-weights.
#[derive(Debug, Clone)]
pub(crate) struct MixtureEval {
    log_weights: Vec<f64>,
    comps: Vec<Gaussian>,
}

pub(crate) struct EvalBuffers {
    scratch: Vec<f64>,
    joint: Vec<f64>,
}

impl MixtureEval {
    pub fn new(model: &GmmModel) -> Result<Self> {
        let comps = model
            .means
            .iter()
            .zip(&model.covariances)
            .map(|(m, c)| Gaussian::new(m, c))
            .collect::<Result<_>>()?;
        Ok(Self {
            log_weights: model.weights.iter().map(|w| w.ln()).collect(),
            comps,
        })
    }

    pub fn buffers(&self) -> EvalBuffers {
        EvalBuffers {
            scratch: vec![0.0; self.comps[0].dim()],
            joint: vec![0.0; self.comps.len()],
        }
    }

    pub fn components(&self) -> &[Gaussian] {
        &self.comps
    }

    /// Fills `buf.joint` with `ln α_k + ln N(x | μ_k, Σ_k)` and returns `ln p(x)`.
    pub fn log_joint(&self, x: &[f64], buf: &mut EvalBuffers) -> f64 {
        for ((out, lw), comp) in buf.joint.iter_mut().zip(&self.log_weights).zip(&self.comps) {
            *out = lw + comp.log_pdf(x, &mut buf.scratch);
        }
        log_sum_exp(&buf.joint)
    }

    pub fn log_pdf(&self, x: &[f64], buf: &mut EvalBuffers) -> f64 {
        self.log_joint(x, buf)
    }

    /// Posterior row for `x`, written into `out`.
    pub fn posterior(&self, x: &[f64], buf: &mut EvalBuffers, out: &mut [f64]) -> f64 {
        let lp = self.log_joint(x, buf);
        let mut total = 0.0;
        for (o, j) in out.iter_mut().zip(&buf.joint) {
            *o = (j - lp).exp();
            total += *o;
        }
        out.iter_mut().for_each(|o| *o /= total);
        lp
    }
}

/// E-step posterior probabilities, one row per sample.
pub fn responsibilities(model: &GmmModel, data: &Dataset) -> Result<DMatrix<f64>> {
    Error::check_dim("responsibilities", model.dim(), data.dim())?;
    let eval = MixtureEval::new(model)?;
    let mut buf = eval.buffers();
    let mut out = DMatrix::zeros(data.len(), model.k());
    let mut row = vec![0.0; model.k()];
    for (i, x) in data.rows().enumerate() {
        eval.posterior(x, &mut buf, &mut row);
        for (k, r) in row.iter().enumerate() {
            out[(i, k)] = *r;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmOptions {
    pub max_iter: usize,
    /// Stop when the mean per-sample log-likelihood moves by less than this.
    pub tol: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Relative covariance floor `ε`; the absolute floor is `ε · tr(Σ_data) / d`.
    pub cov_floor: f64,
    /// Lloyd iterations applied to the seeded means before EM.
    pub lloyd_iter: usize,
    pub init: EmInit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmInit {
    /// Uniform weights, every covariance equal to the data covariance.
    Global,
    /// Weights and covariances from the hard k-means partition.
    #[default]
    Partition,
}

impl Default for EmOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            tol: 1e-3,
            restarts: 5,
            seed: 0,
            cov_floor: 1e-6,
            lloyd_iter: 100,
            init: EmInit::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmFit {
    pub model: GmmModel,
    /// Total log-likelihood of the data after each E-step.
    pub loglik_trace: Vec<f64>,
    pub converged: bool,
    /// Index of the restart that produced `model`.
    pub restart: usize,
    /// Absolute eigenvalue floor applied to every covariance.
    pub floor: f64,
}

impl EmFit {
    pub fn final_loglik(&self) -> f64 {
        *self.loglik_trace.last().expect("trace is never empty")
    }
}

pub fn fit_gmm_em(data: &Dataset, k: usize, opts: &EmOptions) -> Result<EmFit> {
    if k == 0 {
        return Err(Error::invalid("number of components must be at least 1"));
    }
    if data.len() < k {
        return Err(Error::invalid(format!(
            "cannot fit {k} components to {} points",
            data.len()
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("EM tolerance must be positive"));
    }
    if opts.restarts == 0 || opts.max_iter == 0 {
        return Err(Error::invalid("EM needs at least one restart and one iteration"));
    }
    let global = data.covariance();
    let d = data.dim() as f64;
    let spread = global.trace() / d;
    if !(spread > 0.0) {
        return Err(Error::Degenerate(
            "all points are identical; covariance cannot be estimated".into(),
        ));
    }
    let floor = opts.cov_floor * spread;

    let mut best: Option<EmFit> = None;
    let mut last_err = None;
    for restart in 0..opts.restarts {
        let seed = derive_indexed(opts.seed, &["em", "restart"], restart as u64);
        match run_em(data, k, opts, &global, floor, seed) {
            Ok((model, trace, converged)) => {
                let ll = *trace.last().unwrap();
                if best.as_ref().is_none_or(|b| ll > b.final_loglik()) {
                    best = Some(EmFit {
                        model,
                        loglik_trace: trace,
                        converged,
                        restart,
                        floor,
                    });
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap())
}

fn kmeans_pp_seeds(data: &Dataset, k: usize, rng: &mut Rng) -> Vec<usize> {
    let n = data.len();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut nearest: Vec<f64> = data.rows().map(|x| sq_dist(x, data.row(chosen[0]))).collect();
    while chosen.len() < k {
        let total: f64 = nearest.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, w) in nearest.iter().enumerate() {
                if target < *w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        chosen.push(next);
        for (i, x) in data.rows().enumerate() {
            nearest[i] = nearest[i].min(sq_dist(x, data.row(next)));
        }
    }
    chosen
}

/// Hard-assignment refinement of the seeded means; empty clusters keep their mean.
fn lloyd(data: &Dataset, means: &mut [Vec<f64>], iters: usize) -> Vec<usize> {
    let k = means.len();
    let d = data.dim();
    let mut assign = vec![usize::MAX; data.len()];
    for _ in 0..iters {
        let mut changed = false;
        for (i, x) in data.rows().enumerate() {
            let best = (0..k)
                .min_by(|&a, &b| sq_dist(x, &means[a]).total_cmp(&sq_dist(x, &means[b])))
                .expect("k >= 1");
            changed |= assign[i] != best;
            assign[i] = best;
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (x, &a) in data.rows().zip(&assign) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(x) {
                *s += v;
            }
        }
        for j in 0..k {
            if counts[j] > 0 {
                means[j] = sums[j].iter().map(|s| s / counts[j] as f64).collect();
            }
        }
    }
    assign
}

type EmRun = (GmmModel, Vec<f64>, bool);

fn run_em(data: &Dataset, k: usize, opts: &EmOptions, global: &DMatrix<f64>, floor: f64, seed: u64) -> Result<EmRun> {
    let n = data.len();
    let d = data.dim();
    let mut rng = rng_from_seed(seed);
    let seeds = kmeans_pp_seeds(data, k, &mut rng);
    let floored_global = global + DMatrix::identity(d, d) * floor;
    let mut means: Vec<Vec<f64>> = seeds.iter().map(|&i| data.row(i).to_vec()).collect();
    let assign = lloyd(data, &mut means, opts.lloyd_iter);
    let global_init = GmmModel {
        weights: vec![1.0 / k as f64; k],
        means: means.iter().map(|m| DVector::from_row_slice(m)).collect(),
        covariances: vec![floored_global; k],
    };
    let mut model = match opts.init {
        EmInit::Global => global_init,
        EmInit::Partition if opts.lloyd_iter > 0 => {
            let hard = DMatrix::from_fn(n, k, |i, j| if assign[i] == j { 1.0 } else { 0.0 });
            m_step(data, &hard, floor).unwrap_or(global_init)
        }
        EmInit::Partition => global_init,
    };

    let mut trace = Vec::new();
    let mut resp = DMatrix::<f64>::zeros(n, k);
    let mut row = vec![0.0; k];
    let mut converged = false;
    for iter in 0..=opts.max_iter {
        // E-step
        let eval = MixtureEval::new(&model)?;
        let mut buf = eval.buffers();
        let mut ll = 0.0;
        for (i, x) in data.rows().enumerate() {
            ll += eval.posterior(x, &mut buf, &mut row);
            for (j, r) in row.iter().enumerate() {
                resp[(i, j)] = *r;
            }
        }
        if !ll.is_finite() {
            return Err(Error::Degenerate("log-likelihood became non-finite".into()));
        }
        let prev = trace.last().copied();
        trace.push(ll);
        if let Some(prev) = prev {
            if (ll - prev).abs() < opts.tol * n as f64 {
                converged = true;
                break;
            }
        }
        if iter == opts.max_iter {
            break;
        }
        model = m_step(data, &resp, floor)?;
    }
    Ok((model, trace, converged))
}

fn m_step(data: &Dataset, resp: &DMatrix<f64>, floor: f64) -> Result<GmmModel> {
    let n = data.len();
    let d = data.dim();
    let k = resp.ncols();
    let mut weights = Vec::with_capacity(k);
    let mut means = Vec::with_capacity(k);
    let mut covariances = Vec::with_capacity(k);
    for j in 0..k {
        let nk: f64 = resp.column(j).sum();
        if !(nk > 1e-10 * n as f64) {
            return Err(Error::Degenerate(format!("component {j} lost all its mass")));
        }
        let mut mean = DVector::zeros(d);
        for (i, x) in data.rows().enumerate() {
            let r = resp[(i, j)];
            for (m, v) in mean.iter_mut().zip(x) {
                *m += r * v;
            }
        }
        mean /= nk;
        let mut cov = DMatrix::zeros(d, d);
        let mut dev = DVector::zeros(d);
        for (i, x) in data.rows().enumerate() {
            for ((o, v), m) in dev.iter_mut().zip(x).zip(mean.iter()) {
                *o = v - m;
            }
            cov.ger(resp[(i, j)], &dev, &dev, 1.0);
        }
        cov /= nk;
        cov = (&cov + cov.transpose()) * 0.5;
        for t in 0..d {
            cov[(t, t)] += floor;
        }
        weights.push(nk / n as f64);
        means.push(mean);
        covariances.push(cov);
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(GmmModel {
        weights,
        means,
        covariances,
    })
}
