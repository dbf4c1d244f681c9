//! Command-line runner.
//!
//! Every run resolves its parameters as defaults < `--config` file < flags,
//! validates them before touching the output directory, and finishes by
//! writing a `run.json` manifest. Exit codes: 0 success, 1 runtime failure
//! (a `FAILED` marker is left behind), 2 invalid arguments or configuration.

mod commands;
mod config;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use crate::data::write_json;
use crate::error::{Error, Result};

pub use commands::{
    EnsembleParams, FnnTrainParams, GenDataParams, GmmSelectParams, HSetting, RdInit, RdModel, RdSimParams, Trainer,
};

pub const SEED_ENV: &str = "SYNLEARN_SEED";
pub const MANIFEST: &str = "run.json";
pub const FAILED_MARKER: &str = "FAILED";

#[derive(Debug, Parser)]
#[command(
    name = "synlearn",
    version,
    about = "Free-energy learning toolkit: ensembles, cluster selection, regularized networks, reaction-diffusion"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON file with parameters; explicit flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Root seed (falls back to the config file, then $SYNLEARN_SEED, then 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for artifacts [default: out].
    #[arg(long, global = true, value_name = "DIR")]
    output_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Partition function, free energy, mean energy and entropy of a spectrum.
    Ensemble(commands::EnsembleArgs),
    /// Choose a mixture size by minimum KL between kernel and mixture models.
    GmmSelect(commands::GmmSelectArgs),
    /// Train a single-hidden-layer network with a Jacobian penalty.
    FnnTrain(commands::FnnTrainArgs),
    /// Run a reaction-diffusion simulation from a JSON config.
    RdSim(commands::RdSimArgs),
    /// Generate synthetic blob or regression data.
    GenData(commands::GenDataArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ensemble(_) => "ensemble",
            Command::GmmSelect(_) => "gmm-select",
            Command::FnnTrain(_) => "fnn-train",
            Command::RdSim(_) => "rd-sim",
            Command::GenData(_) => "gen-data",
        }
    }
}

/// Work that has passed validation and only needs an output directory.
pub(crate) type Job = Box<dyn FnOnce(&Path) -> Result<Vec<String>>>;

pub(crate) struct Plan {
    pub params: Value,
    pub job: Job,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    subcommand: &'a str,
    seed: u64,
    output_dir: &'a Path,
    params: &'a Value,
    artifacts: &'a [String],
    wall_time_seconds: f64,
}

pub(crate) struct Context {
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Parameters from the config file, without `seed` / `output_dir`.
    pub file: serde_json::Map<String, Value>,
}

fn resolve_context(common: &Common) -> Result<Context> {
    let mut file = match &common.config {
        Some(path) => config::load(path)?,
        None => serde_json::Map::new(),
    };
    let file_seed = match file.remove("seed") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            v.as_u64()
                .ok_or_else(|| Error::invalid(format!("config seed must be a non-negative integer, got {v}")))?,
        ),
    };
    let file_out = match file.remove("output_dir") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(v) => return Err(Error::invalid(format!("config output_dir must be a string, got {v}"))),
    };
    let env_seed = match std::env::var(SEED_ENV) {
        Ok(s) if !s.trim().is_empty() => Some(
            s.trim()
                .parse::<u64>()
                .map_err(|_| Error::invalid(format!("{SEED_ENV}={s} is not a non-negative integer")))?,
        ),
        _ => None,
    };
    Ok(Context {
        seed: common.seed.or(file_seed).or(env_seed).unwrap_or(0),
        output_dir: common
            .output_dir
            .clone()
            .or(file_out)
            .unwrap_or_else(|| PathBuf::from("out")),
        file,
    })
}

fn plan(command: Command, ctx: &Context) -> Result<Plan> {
    match command {
        Command::Ensemble(a) => commands::plan_ensemble(a, ctx),
        Command::GmmSelect(a) => commands::plan_gmm_select(a, ctx),
        Command::FnnTrain(a) => commands::plan_fnn_train(a, ctx),
        Command::RdSim(a) => commands::plan_rd_sim(a, ctx),
        Command::GenData(a) => commands::plan_gen_data(a, ctx),
    }
}

fn execute(plan: Plan, name: &str, ctx: &Context, started: Instant) -> Result<()> {
    let out = &ctx.output_dir;
    std::fs::create_dir_all(out)?;
    let marker = out.join(FAILED_MARKER);
    if marker.exists() {
        std::fs::remove_file(&marker)?;
    }
    let artifacts = (plan.job)(out)?;
    let manifest = Manifest {
        tool: "synlearn",
        version: env!("CARGO_PKG_VERSION"),
        subcommand: name,
        seed: ctx.seed,
        output_dir: out,
        params: &plan.params,
        artifacts: &artifacts,
        wall_time_seconds: started.elapsed().as_secs_f64(),
    };
    write_json(&out.join(MANIFEST), &manifest)
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let started = Instant::now();
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let name = cli.command.name();
    let prepared = resolve_context(&cli.common).and_then(|ctx| plan(cli.command, &ctx).map(|p| (ctx, p)));
    let (ctx, plan) = match prepared {
        Ok(v) => v,
        Err(e) => {
            eprintln!("synlearn {name}: {e}");
            return 2;
        }
    };
    match execute(plan, name, &ctx, started) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("synlearn {name}: {e}");
            let _ = std::fs::create_dir_all(&ctx.output_dir);
            let _ = std::fs::write(ctx.output_dir.join(FAILED_MARKER), format!("{e}\n"));
            1
        }
    }
}
