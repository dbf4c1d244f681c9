use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Tanh,
    Sigmoid,
    /// Linear hidden layer; turns the network into a generalized linear map.
    Identity,
}

impl Activation {
    /// Value, first and second derivative at pre-activation `a`.
    pub fn eval(self, a: f64) -> (f64, f64, f64) {
        match self {
            Activation::Tanh => {
                let t = a.tanh();
                let d = 1.0 - t * t;
                (t, d, -2.0 * t * d)
            }
            Activation::Sigmoid => {
                let s = 1.0 / (1.0 + (-a).exp());
                let d = s * (1.0 - s);
                (s, d, d * (1.0 - 2.0 * s))
            }
            Activation::Identity => (a, 1.0, 0.0),
        }
    }
}

/// Single-hidden-layer network `g(x) = W_out · act(W_in · x + b_in) + b_out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "SlfnRepr", try_from = "SlfnRepr")]
pub struct SlfnModel {
    /// `H × d`
    pub w_in: DMatrix<f64>,
    pub b_in: DVector<f64>,
    /// `m × H`
    pub w_out: DMatrix<f64>,
    pub b_out: DVector<f64>,
    pub activation: Activation,
    /// Scale `σ` of the Gaussian output-noise model.
    pub noise_sigma: f64,
}

/// Hidden-layer quantities at one input.
pub(crate) struct HiddenState {
    pub act: DVector<f64>,
    pub d1: DVector<f64>,
    pub d2: DVector<f64>,
}

impl SlfnModel {
    pub fn new(
        w_in: DMatrix<f64>,
        b_in: DVector<f64>,
        w_out: DMatrix<f64>,
        b_out: DVector<f64>,
        activation: Activation,
    ) -> Result<Self> {
        let m = Self {
            w_in,
            b_in,
            w_out,
            b_out,
            activation,
            noise_sigma: 1.0,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn zeros(input: usize, hidden: usize, output: usize, activation: Activation) -> Self {
        Self {
            w_in: DMatrix::zeros(hidden, input),
            b_in: DVector::zeros(hidden),
            w_out: DMatrix::zeros(output, hidden),
            b_out: DVector::zeros(output),
            activation,
            noise_sigma: 1.0,
        }
    }

    /// Gaussian initialization scaled by fan-in.
    pub fn random(input: usize, hidden: usize, output: usize, activation: Activation, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let mut draw = |rows: usize, cols: usize, fan_in: usize| {
            let s = 1.0 / (fan_in as f64).sqrt();
            DMatrix::from_fn(rows, cols, |_, _| {
                let z: f64 = StandardNormal.sample(&mut rng);
                s * z
            })
        };
        let w_in = draw(hidden, input, input);
        let b_in = draw(hidden, 1, input).column(0).into_owned();
        let w_out = draw(output, hidden, hidden);
        Self {
            w_in,
            b_in,
            w_out,
            b_out: DVector::zeros(output),
            activation,
            noise_sigma: 1.0,
        }
    }

    pub fn with_noise_sigma(mut self, sigma: f64) -> Self {
        self.noise_sigma = sigma;
        self
    }

    pub fn input_dim(&self) -> usize {
        self.w_in.ncols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w_in.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.w_out.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.hidden_dim();
        if h == 0 {
            return Err(Error::invalid("hidden layer needs at least one unit"));
        }
        Error::check_dim("hidden bias", h, self.b_in.len())?;
        Error::check_dim("output weight columns", h, self.w_out.ncols())?;
        Error::check_dim("output bias", self.output_dim(), self.b_out.len())?;
        let finite = self
            .w_in
            .iter()
            .chain(self.b_in.iter())
            .chain(self.w_out.iter())
            .chain(self.b_out.iter())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("network parameters must be finite"));
        }
        Ok(())
    }

    pub(crate) fn hidden(&self, x: &[f64]) -> HiddenState {
        let pre = &self.w_in * DVector::from_column_slice(x) + &self.b_in;
        let mut act = DVector::zeros(pre.len());
        let mut d1 = DVector::zeros(pre.len());
        let mut d2 = DVector::zeros(pre.len());
        for (j, a) in pre.iter().enumerate() {
            let (v, g1, g2) = self.activation.eval(*a);
            act[j] = v;
            d1[j] = g1;
            d2[j] = g2;
        }
        HiddenState { act, d1, d2 }
    }

    pub(crate) fn output_from(&self, hidden: &HiddenState) -> DVector<f64> {
        &self.w_out * &hidden.act + &self.b_out
    }

    pub(crate) fn jacobian_from(&self, hidden: &HiddenState) -> DMatrix<f64> {
        let mut scaled = self.w_in.clone();
        for (j, mut row) in scaled.row_iter_mut().enumerate() {
            row *= hidden.d1[j];
        }
        &self.w_out * scaled
    }
}

pub fn forward(model: &SlfnModel, x: &[f64]) -> Result<DVector<f64>> {
    Error::check_dim("network input", model.input_dim(), x.len())?;
    Ok(model.output_from(&model.hidden(x)))
}

/// Exact `m × d` Jacobian `∂g/∂x = W_out · diag(act'(a)) · W_in`.
pub fn input_jacobian(model: &SlfnModel, x: &[f64]) -> Result<DMatrix<f64>> {
    Error::check_dim("network input", model.input_dim(), x.len())?;
    Ok(model.jacobian_from(&model.hidden(x)))
}

/// How random input weights are drawn for the pseudoinverse trainer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightScheme {
    /// Entries uniform on `[-1, 1] / √d`.
    #[default]
    Uniform,
    /// Entries `N(0, 1) / √d`.
    Gaussian,
}

impl WeightScheme {
    pub(crate) fn draw(self, hidden: usize, input: usize, seed: u64) -> (DMatrix<f64>, DVector<f64>) {
        let mut rng = rng_from_seed(seed);
        let s = 1.0 / (input as f64).sqrt();
        let uniform = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");
        let mut next = || match self {
            WeightScheme::Uniform => s * uniform.sample(&mut rng),
            WeightScheme::Gaussian => {
                let z: f64 = StandardNormal.sample(&mut rng);
                s * z
            }
        };
        let w = DMatrix::from_fn(hidden, input, |_, _| next());
        let b = DVector::from_fn(hidden, |_, _| next());
        (w, b)
    }
}

#[derive(Serialize, Deserialize)]
struct SlfnRepr {
    w_in: Vec<Vec<f64>>,
    b_in: Vec<f64>,
    w_out: Vec<Vec<f64>>,
    b_out: Vec<f64>,
    activation: Activation,
    noise_sigma: f64,
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_rows(rows: &[Vec<f64>], cols_hint: usize) -> Result<DMatrix<f64>> {
    let cols = rows.first().map_or(cols_hint, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::invalid("ragged weight matrix"));
    }
    Ok(DMatrix::from_row_slice(rows.len(), cols, &rows.concat()))
}

impl From<SlfnModel> for SlfnRepr {
    fn from(m: SlfnModel) -> Self {
        Self {
            w_in: to_rows(&m.w_in),
            b_in: m.b_in.iter().copied().collect(),
            w_out: to_rows(&m.w_out),
            b_out: m.b_out.iter().copied().collect(),
            activation: m.activation,
            noise_sigma: m.noise_sigma,
        }
    }
}

impl TryFrom<SlfnRepr> for SlfnModel {
    type Error = Error;

    fn try_from(r: SlfnRepr) -> Result<Self> {
        let m = SlfnModel {
            w_in: from_rows(&r.w_in, 0)?,
            b_in: DVector::from_vec(r.b_in),
            w_out: from_rows(&r.w_out, r.w_in.len())?,
            b_out: DVector::from_vec(r.b_out),
            activation: r.activation,
            noise_sigma: r.noise_sigma,
        };
        m.validate()?;
        Ok(m)
    }
}
