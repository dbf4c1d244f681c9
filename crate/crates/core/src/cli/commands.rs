use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::config::{resolve, Overrides};
use super::{Context, Plan};
use crate::data::{
    format_f64, gen_blobs, gen_regression, read_dataset_csv, read_matrix_csv, write_csv_records, write_dataset_csv,
    write_json, write_matrix_csv, write_pgm, BlobSpec, RegressionFn, RegressionSpec,
};
use crate::ensemble::{compute_thermodynamics, ensemble_free_energy, EnsembleSpec};
use crate::error::{Error, Result};
use crate::fnn::{
    estimate_reg_param, loss_regularized, train_gd, train_pil, Activation, GdOptions, HMode, PilOptions, SlfnModel,
    SupervisedSet, WeightScheme,
};
use crate::mixture::{select_cluster_number, validate_range, BandwidthOptions, EmInit, SelectOptions, MIN_MC_SAMPLES};
use crate::rd::{
    seeded_square, simulate_1d, simulate_2d, stability_bound_1d, Boundary, Field1D, GrayScott, Grid, Potential,
    RdState2D, StepControl, TracePoint,
};
use crate::rng::{derive_seed, rng_from_seed};

fn header(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|j| format!("{prefix}{j}")).collect()
}

fn trace_rows(trace: &[TracePoint]) -> Vec<Vec<String>> {
    trace
        .iter()
        .map(|p| vec![p.step.to_string(), format_f64(p.time), format_f64(p.metric)])
        .collect()
}

// ---------------------------------------------------------------- ensemble

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    /// Energy levels, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    energies: Option<Vec<f64>>,
    /// Degeneracy of each level [default: all 1].
    #[arg(long, value_delimiter = ',')]
    degeneracies: Option<Vec<f64>>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long = "k-b")]
    k_b: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleParams {
    pub energies: Vec<f64>,
    pub degeneracies: Option<Vec<f64>>,
    pub beta: f64,
    pub k_b: f64,
}

impl Default for EnsembleParams {
    fn default() -> Self {
        Self {
            energies: Vec::new(),
            degeneracies: None,
            beta: 1.0,
            k_b: 1.0,
        }
    }
}

pub(crate) fn plan_ensemble(a: EnsembleArgs, ctx: &Context) -> Result<Plan> {
    let mut o = Overrides::default();
    o.set("energies", a.energies)?
        .set("degeneracies", a.degeneracies)?
        .set("beta", a.beta)?
        .set("k_b", a.k_b)?;
    let (p, params): (EnsembleParams, _) = resolve(EnsembleParams::default(), &ctx.file, o.into_map())?;
    let mut spec = EnsembleSpec::new(p.energies.clone(), p.beta);
    spec.k_b = p.k_b;
    if let Some(g) = p.degeneracies {
        spec = spec.with_degeneracies(g);
    }
    spec.validate()?;
    Ok(Plan {
        params,
        job: Box::new(move |out: &Path| {
            let report = compute_thermodynamics(&spec)?;
            let soft_min = ensemble_free_energy(&spec.energies, spec.beta)?;
            let doc = json!({
                "spec": spec,
                "temperature": spec.temperature(),
                "report": report,
                "soft_min_free_energy": soft_min,
            });
            write_json(&out.join("thermo.json"), &doc)?;
            Ok(vec!["thermo.json".into()])
        }),
    })
}

// ---------------------------------------------------------------- gmm-select

#[derive(Debug, Args)]
pub struct GmmSelectArgs {
    /// Dataset CSV [default: <output-dir>/data.csv].
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    k_min: Option<usize>,
    #[arg(long)]
    k_max: Option<usize>,
    /// EM restarts per k.
    #[arg(long)]
    restarts: Option<usize>,
    /// Monte Carlo draws for each KL estimate.
    #[arg(long)]
    mc_samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GmmSelectParams {
    pub input: Option<PathBuf>,
    pub k_min: usize,
    pub k_max: usize,
    pub restarts: usize,
    pub mc_samples: usize,
    pub em_max_iter: usize,
    pub em_tol: f64,
    pub cov_floor: f64,
    pub em_init: EmInit,
    pub max_fp_iter: usize,
    pub fp_tol: f64,
    pub h0_sq: Option<f64>,
}

impl Default for GmmSelectParams {
    fn default() -> Self {
        let s = SelectOptions::default();
        Self {
            input: None,
            k_min: 1,
            k_max: 6,
            restarts: s.restarts,
            mc_samples: s.mc_samples,
            em_max_iter: s.em_max_iter,
            em_tol: s.em_tol,
            cov_floor: s.cov_floor,
            em_init: s.em_init,
            max_fp_iter: s.bandwidth.max_fp_iter,
            fp_tol: s.bandwidth.fp_tol,
            h0_sq: s.bandwidth.h0_sq,
        }
    }
}

pub(crate) fn plan_gmm_select(a: GmmSelectArgs, ctx: &Context) -> Result<Plan> {
    let mut o = Overrides::default();
    o.set("input", a.input)?
        .set("k_min", a.k_min)?
        .set("k_max", a.k_max)?
        .set("restarts", a.restarts)?
        .set("mc_samples", a.mc_samples)?;
    let (mut p, _): (GmmSelectParams, _) = resolve(GmmSelectParams::default(), &ctx.file, o.into_map())?;
    let input = p.input.clone().unwrap_or_else(|| ctx.output_dir.join("data.csv"));
    p.input = Some(input.clone());
    let params = serde_json::to_value(&p)?;

    if !input.exists() {
        return Err(Error::invalid(format!(
            "input dataset {} does not exist",
            input.display()
        )));
    }
    let data = read_dataset_csv(&input)?;
    validate_range(data.len(), p.k_min, p.k_max)?;
    if p.mc_samples < MIN_MC_SAMPLES {
        return Err(Error::invalid(format!("mc_samples must be at least {MIN_MC_SAMPLES}")));
    }
    if p.restarts == 0 || p.em_max_iter == 0 || !(p.em_tol > 0.0) || !(p.cov_floor >= 0.0) {
        return Err(Error::invalid(
            "EM needs restarts >= 1, em_max_iter >= 1, em_tol > 0, cov_floor >= 0",
        ));
    }
    if !(p.fp_tol > 0.0) || p.max_fp_iter == 0 || p.h0_sq.is_some_and(|h| !(h > 0.0)) {
        return Err(Error::invalid(
            "bandwidth needs fp_tol > 0, max_fp_iter >= 1 and h0_sq > 0",
        ));
    }
    let opts = SelectOptions {
        seed: ctx.seed,
        restarts: p.restarts,
        mc_samples: p.mc_samples,
        em_max_iter: p.em_max_iter,
        em_tol: p.em_tol,
        cov_floor: p.cov_floor,
        em_init: p.em_init,
        bandwidth: BandwidthOptions {
            max_fp_iter: p.max_fp_iter,
            fp_tol: p.fp_tol,
            h0_sq: p.h0_sq,
        },
    };
    let seed = ctx.seed;
    Ok(Plan {
        params,
        job: Box::new(move |out: &Path| {
            let report = select_cluster_number(&data, p.k_min, p.k_max, &opts)?;
            let doc = json!({
                "n": data.len(),
                "dim": data.dim(),
                "k_min": p.k_min,
                "k_max": p.k_max,
                "seed": seed,
                "chosen_k": report.chosen_k,
                "per_k": report.per_k,
            });
            write_json(&out.join("selection.json"), &doc)?;
            let cols = [
                "k",
                "converged_loglik",
                "em_converged",
                "em_restart_used",
                "h_sq",
                "bandwidth_converged",
                "bandwidth_degenerate",
                "mean_density",
                "nn_ratio",
                "kl_estimate",
                "kl_std_error",
                "failure",
            ];
            let rows = report
                .per_k
                .iter()
                .map(|r| {
                    vec![
                        r.k.to_string(),
                        format_f64(r.converged_loglik),
                        r.em_converged.to_string(),
                        r.em_restart_used.to_string(),
                        format_f64(r.h_sq),
                        r.bandwidth_converged.to_string(),
                        r.bandwidth_degenerate.to_string(),
                        format_f64(r.mean_density),
                        format_f64(r.nn_ratio),
                        format_f64(r.kl_estimate),
                        format_f64(r.kl_std_error),
                        r.failure.clone().unwrap_or_default(),
                    ]
                })
                .collect();
            let cols: Vec<String> = cols.iter().map(|c| c.to_string()).collect();
            write_csv_records(&out.join("selection.csv"), &cols, rows)?;
            Ok(vec!["selection.json".into(), "selection.csv".into()])
        }),
    })
}

// ---------------------------------------------------------------- fnn-train

/// Fixed regularization strength or the closed-form estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HSetting {
    Fixed(f64),
    Named(HName),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HName {
    #[serde(rename = "auto")]
    Auto,
}

impl HSetting {
    pub const AUTO: HSetting = HSetting::Named(HName::Auto);
}

impl FromStr for HSetting {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            Ok(Self::AUTO)
        } else {
            s.parse::<f64>()
                .map(HSetting::Fixed)
                .map_err(|_| format!("expected a number or 'auto', got '{s}'"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Trainer {
    #[default]
    Gd,
    Pil,
}

#[derive(Debug, Args)]
pub struct FnnTrainArgs {
    /// Input matrix CSV (header row, one sample per row).
    #[arg(long)]
    inputs: Option<PathBuf>,
    /// Target matrix CSV with the same number of rows.
    #[arg(long)]
    targets: Option<PathBuf>,
    /// Synthetic 1-D task used when no inputs are given: sinc, linear or sine.
    #[arg(long)]
    task: Option<String>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long, value_enum)]
    trainer: Option<Trainer>,
    /// Regularization strength, or `auto` for the closed-form estimate.
    #[arg(long)]
    h: Option<HSetting>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    /// Train an autoencoder: targets are the inputs.
    #[arg(long)]
    contractive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FnnTrainParams {
    pub inputs: Option<PathBuf>,
    pub targets: Option<PathBuf>,
    pub task: RegressionFn,
    pub n: usize,
    pub domain: [f64; 2],
    pub noise_sigma: f64,
    pub hidden: usize,
    pub trainer: Trainer,
    pub h: HSetting,
    pub epochs: usize,
    pub lr: f64,
    pub activation: Activation,
    pub weight_scheme: WeightScheme,
    /// Scale of the Gaussian error model.
    pub sigma: f64,
    pub contractive: bool,
}

impl Default for FnnTrainParams {
    fn default() -> Self {
        let r = RegressionSpec::default();
        let g = GdOptions::default();
        Self {
            inputs: None,
            targets: None,
            task: r.function,
            n: r.n,
            domain: r.domain,
            noise_sigma: r.noise_sigma,
            hidden: 10,
            trainer: Trainer::Gd,
            h: HSetting::Fixed(0.0),
            epochs: g.epochs,
            lr: g.lr,
            activation: Activation::Tanh,
            weight_scheme: WeightScheme::Uniform,
            sigma: 1.0,
            contractive: false,
        }
    }
}

fn load_supervised(p: &FnnTrainParams, seed: u64) -> Result<SupervisedSet> {
    let set = match &p.inputs {
        Some(path) => {
            let (_, x) = read_matrix_csv(path)?;
            if p.contractive {
                if p.targets.is_some() {
                    return Err(Error::invalid(
                        "--contractive uses the inputs as targets; drop --targets",
                    ));
                }
                SupervisedSet::new(x.clone(), x)?
            } else {
                let tp = p
                    .targets
                    .as_ref()
                    .ok_or_else(|| Error::invalid("--inputs needs --targets (or --contractive)"))?;
                let (_, z) = read_matrix_csv(tp)?;
                SupervisedSet::new(x, z)?
            }
        }
        None => {
            if p.targets.is_some() {
                return Err(Error::invalid("--targets given without --inputs"));
            }
            let spec = RegressionSpec {
                function: p.task,
                n: p.n,
                domain: p.domain,
                noise_sigma: p.noise_sigma,
                seed: derive_seed(seed, &["fnn-train", "data"]),
            };
            let s = gen_regression(&spec)?;
            if p.contractive {
                SupervisedSet::new(s.inputs().clone(), s.inputs().clone())?
            } else {
                s
            }
        }
    };
    Ok(set)
}

pub(crate) fn plan_fnn_train(a: FnnTrainArgs, ctx: &Context) -> Result<Plan> {
    let mut o = Overrides::default();
    o.set("inputs", a.inputs)?
        .set("targets", a.targets)?
        .set("task", a.task)?
        .set("hidden", a.hidden)?
        .set("trainer", a.trainer)?
        .set("h", a.h)?
        .set("epochs", a.epochs)?
        .set("lr", a.lr)?
        .flag("contractive", a.contractive);
    let (p, params): (FnnTrainParams, _) = resolve(FnnTrainParams::default(), &ctx.file, o.into_map())?;
    if p.hidden == 0 {
        return Err(Error::invalid("hidden must be at least 1"));
    }
    if !(p.lr.is_finite() && p.lr >= 0.0) {
        return Err(Error::invalid(format!("lr = {} must be finite and >= 0", p.lr)));
    }
    if !(p.sigma.is_finite() && p.sigma > 0.0) {
        return Err(Error::invalid(format!("sigma = {} must be positive", p.sigma)));
    }
    if let HSetting::Fixed(h) = p.h {
        if !(h.is_finite() && h >= 0.0) {
            return Err(Error::invalid(format!("h = {h} must be >= 0")));
        }
    }
    let data = load_supervised(&p, ctx.seed)?;
    let seed = ctx.seed;

    Ok(Plan {
        params,
        job: Box::new(move |out: &Path| {
            let (model, trace, h_final) = match p.trainer {
                Trainer::Gd => {
                    let init = SlfnModel::random(
                        data.input_dim(),
                        p.hidden,
                        data.target_dim(),
                        p.activation,
                        derive_seed(seed, &["fnn-train", "init"]),
                    )
                    .with_noise_sigma(p.sigma);
                    let mode = match p.h {
                        HSetting::Fixed(h) => HMode::Fixed(h),
                        HSetting::Named(HName::Auto) => HMode::Auto,
                    };
                    let r = train_gd(
                        &init,
                        &data,
                        mode,
                        &GdOptions {
                            lr: p.lr,
                            epochs: p.epochs,
                        },
                    )?;
                    let rows: Vec<Vec<String>> = (0..r.loss_trace.len())
                        .map(|e| {
                            vec![
                                e.to_string(),
                                format_f64(r.loss_trace[e]),
                                format_f64(r.sse_trace[e]),
                                format_f64(r.h_trace[e]),
                            ]
                        })
                        .collect();
                    let h = *r.h_trace.last().expect("trace has an initial entry");
                    (r.model, rows, h)
                }
                Trainer::Pil => {
                    let opts = PilOptions {
                        seed: derive_seed(seed, &["fnn-train", "pil"]),
                        weight_scheme: p.weight_scheme,
                        activation: p.activation,
                    };
                    let h = match p.h {
                        HSetting::Fixed(h) => h,
                        // estimate on the unregularized fit, then refit with the same hidden layer
                        HSetting::Named(HName::Auto) => estimate_reg_param(
                            &train_pil(&data, p.hidden, 0.0, &opts)?.with_noise_sigma(p.sigma),
                            &data,
                        )?,
                    };
                    let m = train_pil(&data, p.hidden, h, &opts)?.with_noise_sigma(p.sigma);
                    let l = loss_regularized(&m, &data, h, false)?;
                    let rows = vec![vec![
                        "0".into(),
                        format_f64(l.total),
                        format_f64(l.sse_term),
                        format_f64(h),
                    ]];
                    (m, rows, h)
                }
            };
            let breakdown = loss_regularized(&model, &data, h_final, true)?;
            let estimate = estimate_reg_param(&model, &data).ok();
            write_json(&out.join("model.json"), &model)?;
            let cols: Vec<String> = ["epoch", "total", "sse", "h"].iter().map(|c| c.to_string()).collect();
            write_csv_records(&out.join("loss_trace.csv"), &cols, trace)?;
            let doc = json!({
                "trainer": p.trainer,
                "contractive": p.contractive,
                "n_samples": data.len(),
                "h_final": h_final,
                "reg_param_estimate": estimate,
                "loss": breakdown,
            });
            write_json(&out.join("loss.json"), &doc)?;
            Ok(vec!["model.json".into(), "loss_trace.csv".into(), "loss.json".into()])
        }),
    })
}

// ---------------------------------------------------------------- rd-sim

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RdModel {
    /// Two species on a periodic 2-D grid.
    #[default]
    GrayScott,
    /// One field, `∂φ/∂t = D ∂²φ/∂x² + R(φ)`.
    GradientFlow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RdInit {
    /// `(u, v) = (1, 0)`; `φ = 0` in 1-D.
    Homogeneous,
    /// Centered square at `(u, v) = (0.5, 0.25)`.
    SeededSquare { size: usize },
    /// 2-D: `u = 1 − a·ξ`, `v = a·ξ'` with `ξ, ξ'` uniform on [0, 1). 1-D: `φ` uniform on [−a, a].
    Random { amplitude: f64 },
}

#[derive(Debug, Args)]
pub struct RdSimArgs {
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    snapshot_every: Option<usize>,
    /// Time step as a fraction of the explicit stability bound.
    #[arg(long)]
    dt_factor: Option<f64>,
    /// Also write every snapshot as a raw CSV grid.
    #[arg(long)]
    csv_grids: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RdSimParams {
    pub model: RdModel,
    /// `[ny, nx]` for 2-D, `[n]` for 1-D.
    pub grid: Option<Vec<usize>>,
    pub dx: Option<f64>,
    /// Fraction of the diffusion bound; 0.8 for gray_scott, 0.4 for gradient_flow.
    pub dt_factor: Option<f64>,
    pub steps: usize,
    pub snapshot_every: usize,
    pub d_u: f64,
    pub d_v: f64,
    pub kinetics: GrayScott,
    /// Diffusion coefficient of the 1-D model.
    pub diffusion: f64,
    pub boundary: Boundary,
    pub potential: Potential,
    pub init: Option<RdInit>,
    pub csv_grids: bool,
}

impl Default for RdSimParams {
    fn default() -> Self {
        Self {
            model: RdModel::GrayScott,
            grid: None,
            dx: None,
            dt_factor: None,
            steps: 20_000,
            snapshot_every: 2_000,
            d_u: 2e-5,
            d_v: 1e-5,
            kinetics: GrayScott::default(),
            diffusion: 1.0,
            boundary: Boundary::Periodic,
            potential: Potential::AllenCahn,
            init: None,
            csv_grids: false,
        }
    }
}

fn grid_to_matrix(g: &Grid) -> DMatrix<f64> {
    DMatrix::from_row_slice(g.ny(), g.nx(), g.as_slice())
}

pub(crate) fn plan_rd_sim(a: RdSimArgs, ctx: &Context) -> Result<Plan> {
    let mut o = Overrides::default();
    o.set("steps", a.steps)?
        .set("snapshot_every", a.snapshot_every)?
        .set("dt_factor", a.dt_factor)?
        .flag("csv_grids", a.csv_grids);
    let (mut p, _): (RdSimParams, _) = resolve(RdSimParams::default(), &ctx.file, o.into_map())?;
    // the reaction term tightens the explicit limit for the double-well flow
    let dt_factor = *p.dt_factor.get_or_insert(match p.model {
        RdModel::GrayScott => 0.8,
        RdModel::GradientFlow => 0.4,
    });
    if !(dt_factor.is_finite() && dt_factor > 0.0) {
        return Err(Error::invalid(format!("dt_factor = {dt_factor} must be positive")));
    }
    if p.snapshot_every == 0 {
        return Err(Error::invalid("snapshot_every must be at least 1"));
    }
    let mut rng = rng_from_seed(derive_seed(ctx.seed, &["rd-sim", "init"]));
    let mut uniform = move || rand::Rng::random::<f64>(&mut rng);

    match p.model {
        RdModel::GrayScott => {
            let grid = p.grid.get_or_insert_with(|| vec![128, 128]).clone();
            let [ny, nx] = grid[..] else {
                return Err(Error::invalid("gray_scott needs grid = [ny, nx]"));
            };
            let dx = *p.dx.get_or_insert(1.0 / nx as f64);
            let init = *p.init.get_or_insert(RdInit::SeededSquare { size: 10 });
            let (u, v) = match init {
                RdInit::Homogeneous => (Grid::filled(ny, nx, 1.0), Grid::filled(ny, nx, 0.0)),
                RdInit::SeededSquare { size } => seeded_square(ny, nx, size),
                RdInit::Random { amplitude } => {
                    let u = Grid::from_fn(ny, nx, |_, _| 1.0 - amplitude * uniform());
                    let v = Grid::from_fn(ny, nx, |_, _| amplitude * uniform());
                    (u, v)
                }
            };
            let state = RdState2D::new(u, v, dx, p.d_u, p.d_v, p.kinetics)?;
            let ctrl = StepControl {
                dt: dt_factor * state.stability_bound(),
                steps: p.steps,
                snapshot_every: p.snapshot_every,
            };
            crate::rd::check_dt(ctrl.dt, state.stability_bound())?;
            let params = serde_json::to_value(&p)?;
            let csv_grids = p.csv_grids;
            Ok(Plan {
                params,
                job: Box::new(move |out: &Path| {
                    let run = simulate_2d(&state, &ctrl)?;
                    std::fs::create_dir_all(out.join("snapshots"))?;
                    let mut artifacts = Vec::new();
                    for s in &run.snapshots {
                        for (name, g) in [("u", &s.u), ("v", &s.v)] {
                            let stem = format!("snapshots/{name}_{:06}", s.step);
                            write_pgm(g, &out.join(format!("{stem}.pgm")))?;
                            artifacts.push(format!("{stem}.pgm"));
                            artifacts.push(format!("{stem}.json"));
                            if csv_grids {
                                write_matrix_csv(
                                    &grid_to_matrix(g),
                                    &header("c", g.nx()),
                                    &out.join(format!("{stem}.csv")),
                                )?;
                                artifacts.push(format!("{stem}.csv"));
                            }
                        }
                    }
                    let cols: Vec<String> = ["step", "time", "metric"].iter().map(|c| c.to_string()).collect();
                    write_csv_records(&out.join("metrics.csv"), &cols, trace_rows(&run.trace))?;
                    artifacts.push("metrics.csv".into());
                    Ok(artifacts)
                }),
            })
        }
        RdModel::GradientFlow => {
            let grid = p.grid.get_or_insert_with(|| vec![128]).clone();
            let [n] = grid[..] else {
                return Err(Error::invalid("gradient_flow needs grid = [n]"));
            };
            let dx = *p.dx.get_or_insert(1.0);
            let init = *p.init.get_or_insert(RdInit::Random { amplitude: 0.1 });
            let values = match init {
                RdInit::Homogeneous => vec![0.0; n],
                RdInit::Random { amplitude } => (0..n).map(|_| amplitude * (2.0 * uniform() - 1.0)).collect(),
                RdInit::SeededSquare { .. } => {
                    return Err(Error::invalid("seeded_square init applies to gray_scott only"));
                }
            };
            let field = Field1D::new(values, dx, p.boundary)?;
            if !(p.diffusion.is_finite() && p.diffusion > 0.0) {
                return Err(Error::invalid("diffusion must be positive"));
            }
            let bound = stability_bound_1d(dx, p.diffusion);
            let ctrl = StepControl {
                dt: dt_factor * bound,
                steps: p.steps,
                snapshot_every: p.snapshot_every,
            };
            crate::rd::check_dt(ctrl.dt, bound)?;
            let params = serde_json::to_value(&p)?;
            let (d, potential) = (p.diffusion, p.potential);
            Ok(Plan {
                params,
                job: Box::new(move |out: &Path| {
                    let run = simulate_1d(&field, d, potential, &ctrl)?;
                    std::fs::create_dir_all(out.join("snapshots"))?;
                    let mut artifacts = Vec::new();
                    for (step, f) in &run.snapshots {
                        let name = format!("snapshots/phi_{step:06}.csv");
                        let m = DMatrix::from_fn(f.len(), 2, |i, j| if j == 0 { i as f64 * f.dx } else { f.values[i] });
                        write_matrix_csv(&m, &["x".into(), "phi".into()], &out.join(&name))?;
                        artifacts.push(name);
                    }
                    let cols: Vec<String> = ["step", "time", "metric"].iter().map(|c| c.to_string()).collect();
                    write_csv_records(&out.join("metrics.csv"), &cols, trace_rows(&run.trace))?;
                    artifacts.push("metrics.csv".into());
                    Ok(artifacts)
                }),
            })
        }
    }
}

// ---------------------------------------------------------------- gen-data

#[derive(Debug, Args)]
pub struct GenDataArgs {
    /// Gaussian blobs: k=, n= (per cluster), d=, sep=, sigma=, seed=.
    #[arg(long, num_args = 0.., value_name = "KEY=VALUE")]
    blobs: Option<Vec<String>>,
    /// Regression set: fn=sinc|linear|sine, n=, lo=, hi=, noise=, seed=.
    #[arg(long, num_args = 0.., value_name = "KEY=VALUE")]
    regression: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenDataParams {
    pub blobs: Option<BlobSpec>,
    pub regression: Option<RegressionSpec>,
}

fn kv_map(pairs: &[String], aliases: &[(&str, &str)]) -> Result<Map<String, Value>> {
    let mut map = Map::new();
    for pair in pairs {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::invalid(format!("expected KEY=VALUE, got '{pair}'")))?;
        let key = aliases.iter().find(|(a, _)| *a == k).map_or(k, |(_, full)| full);
        let value = serde_json::from_str::<Value>(v).unwrap_or_else(|_| Value::String(v.to_owned()));
        map.insert(key.to_owned(), value);
    }
    Ok(map)
}

const BLOB_KEYS: &[(&str, &str)] = &[("n", "per_cluster_n"), ("d", "dim"), ("sep", "separation")];
const REGRESSION_KEYS: &[(&str, &str)] = &[("noise", "noise_sigma")];

/// Fills in the run seed and folds `lo` / `hi` into `domain`.
fn complete_spec(map: &mut Map<String, Value>, seed: u64, regression: bool) {
    map.entry("seed").or_insert(json!(seed));
    if regression {
        let [lo0, hi0] = RegressionSpec::default().domain;
        let lo = map.remove("lo");
        let hi = map.remove("hi");
        if lo.is_some() || hi.is_some() {
            map.insert(
                "domain".into(),
                json!([lo.unwrap_or(json!(lo0)), hi.unwrap_or(json!(hi0))]),
            );
        }
    }
}

pub(crate) fn plan_gen_data(a: GenDataArgs, ctx: &Context) -> Result<Plan> {
    let mut file = ctx.file.clone();
    for (key, regression) in [("blobs", false), ("regression", true)] {
        if let Some(Value::Object(m)) = file.get_mut(key) {
            complete_spec(m, ctx.seed, regression);
        }
    }
    let mut flags = Map::new();
    if let Some(pairs) = &a.blobs {
        let mut m = kv_map(pairs, BLOB_KEYS)?;
        complete_spec(&mut m, ctx.seed, false);
        flags.insert("blobs".into(), Value::Object(m));
    }
    if let Some(pairs) = &a.regression {
        let mut m = kv_map(pairs, REGRESSION_KEYS)?;
        complete_spec(&mut m, ctx.seed, true);
        flags.insert("regression".into(), Value::Object(m));
    }
    let (mut p, _): (GenDataParams, _) = resolve(GenDataParams::default(), &file, flags)?;
    if p.blobs.is_none() && p.regression.is_none() {
        p.blobs = Some(BlobSpec {
            seed: ctx.seed,
            ..Default::default()
        });
    }
    if let Some(b) = &p.blobs {
        b.validate()?;
    }
    if let Some(r) = &p.regression {
        r.validate()?;
    }
    let params = serde_json::to_value(&p)?;
    Ok(Plan {
        params,
        job: Box::new(move |out: &Path| {
            let mut artifacts = Vec::new();
            if let Some(b) = &p.blobs {
                write_dataset_csv(&gen_blobs(b)?, &out.join("data.csv"))?;
                artifacts.push("data.csv".into());
            }
            if let Some(r) = &p.regression {
                let s = gen_regression(r)?;
                write_matrix_csv(s.inputs(), &header("x", s.input_dim()), &out.join("inputs.csv"))?;
                write_matrix_csv(s.targets(), &header("z", s.target_dim()), &out.join("targets.csv"))?;
                artifacts.push("inputs.csv".into());
                artifacts.push("targets.csv".into());
            }
            Ok(artifacts)
        }),
    })
}
