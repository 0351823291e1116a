use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use toruslab::lab::config::OUTPUT_DIR_ENV;
use toruslab::lab::experiments::run;
use toruslab::lab::ExperimentConfig;
use toruslab::LabError;

/// Numerical experiments on the GUE-perturbed discrete torus.
///
/// Exit status: 0 when every check passed, 2 when a numerical check failed,
/// 1 on usage or configuration errors.
#[derive(Parser)]
#[command(name = "toruslab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the lattice densities rho_{a,b} and the arcsine densities.
    Rho(Common),
    /// Sample the Gaussian wave on a window and compare covariances.
    WaveSample(Common),
    /// Window statistics of perturbed torus eigenvectors across noise exponents.
    PhaseScan(Common),
    /// Variance of smoothed spectral measures under random boundary phases.
    Regularity(Common),
    /// Close-pair statistic of torus eigenvalues.
    ClosePairs(Common),
    /// Free convolution with the semicircle law.
    FreeConv(Common),
    /// Eigenvector overlaps of diagonal-plus-GUE matrices.
    Benigni(Common),
    /// Resolvent flow drift and quadratic variation.
    Flow(Common),
    /// GUE normalization and eigenvector concentration.
    Concentration(Common),
    /// Gaussian-wave Fourier variance.
    FourierScan(Common),
    /// Level-set images of perturbed eigenvectors or of a field CSV.
    Render(Common),
}

#[derive(Args, Default)]
struct Common {
    /// JSON file of configuration overrides.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = OUTPUT_DIR_ENV)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    /// Sizes for scaling experiments (comma separated).
    #[arg(long, value_delimiter = ',')]
    ns: Option<Vec<usize>>,
    #[arg(long, allow_hyphen_values = true)]
    energy: Option<f64>,
    /// Noise exponents (comma separated).
    #[arg(long, value_delimiter = ',')]
    gamma: Option<Vec<f64>>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long)]
    half_width: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    /// Lattice offset `a,b`.
    #[arg(long, value_delimiter = ',', num_args = 2, allow_hyphen_values = true)]
    offset: Option<Vec<i64>>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    root_tol: Option<f64>,
    #[arg(long)]
    threshold_factor: Option<f64>,
    /// Window origin `x,y`.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    origin: Option<Vec<usize>>,
    #[arg(long)]
    negative_control: bool,
    #[arg(long)]
    pixel_scale: Option<usize>,
    #[arg(long)]
    banded: bool,
    /// Field CSV (`x,y,re,im`) to render.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Image format: ppm or svg.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn overrides(&self) -> Value {
        let mut m = Map::new();
        let mut put = |k: &str, v: Value| {
            if !v.is_null() {
                m.insert(k.to_string(), v);
            }
        };
        put("output_dir", json!(self.out));
        put("master_seed", json!(self.seed));
        put("n", json!(self.n));
        put("ns", json!(self.ns));
        put("energy", json!(self.energy));
        put("gammas", json!(self.gamma));
        put("delta", json!(self.delta));
        put("epsilon", json!(self.epsilon));
        put("ell", json!(self.ell));
        put("half_width", json!(self.half_width));
        put("eta", json!(self.eta));
        put("offset", json!(self.offset));
        put("r", json!(self.r));
        put("t", json!(self.t));
        put("dt", json!(self.dt));
        put("steps", json!(self.steps));
        put("paths", json!(self.paths));
        put("trials", json!(self.trials));
        put("samples", json!(self.samples));
        put("tol", json!(self.tol));
        put("root_tol", json!(self.root_tol));
        put("threshold_factor", json!(self.threshold_factor));
        put("origin", json!(self.origin));
        put("pixel_scale", json!(self.pixel_scale));
        put("input", json!(self.input));
        put("format", json!(self.format));
        put("grid_points", json!(self.grid_points));
        put("threads", json!(self.threads));
        if self.negative_control {
            put("negative_control", json!(true));
        }
        if self.banded {
            put("banded", json!(true));
        }
        Value::Object(m)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = match &cli.command {
        Command::Rho(c) => ("rho", c),
        Command::WaveSample(c) => ("wave-sample", c),
        Command::PhaseScan(c) => ("phase-scan", c),
        Command::Regularity(c) => ("regularity", c),
        Command::ClosePairs(c) => ("close-pairs", c),
        Command::FreeConv(c) => ("free-conv", c),
        Command::Benigni(c) => ("benigni", c),
        Command::Flow(c) => ("flow", c),
        Command::Concentration(c) => ("concentration", c),
        Command::FourierScan(c) => ("fourier-scan", c),
        Command::Render(c) => ("render", c),
    };
    let cfg = match ExperimentConfig::resolve(name, common.config.as_deref(), &common.overrides()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("toruslab: {e}");
            return ExitCode::from(1);
        }
    };
    match run(&cfg) {
        Ok(rec) => {
            for c in &rec.checks {
                println!("{}", c.line());
            }
            println!("results: {}", cfg.run_dir().join("results.json").display());
            if rec.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e @ (LabError::InvalidParameter(_) | LabError::Io(_) | LabError::Json(_) | LabError::Csv(_))) => {
            eprintln!("toruslab: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("toruslab: numerical failure: {e}");
            ExitCode::from(2)
        }
    }
}
