//! `phaselift` command-line harness: solve measurement files, generate
//! planted instances and run the MDM experiments.
//!
//! Exit status: 0 on success, 2 for invalid configuration or input, 3 for
//! I/O failures and 4 for solver failures.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use phaselift::experiment::{
    flops_report, run_ber_sweep, run_convergence, snr_range, write_convergence_csv, write_flops_csv,
    write_sweep_csv, ExperimentConfig,
};
use phaselift::flops::FlopCounter;
use phaselift::sim::{generate_channel, generate_training, measure_intensities};
use phaselift::{Error, MeasurementSet, Method, SolverConfig};

#[derive(Debug)]
enum CliError {
    Config(String),
    Io(String),
    Solver(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Solver(_) => 4,
        }
    }

    fn io(path: &Path, e: io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Solver(m) => write!(f, "solver error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::Format(_) | Error::Dimension(_) | Error::NonFinite { .. } => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Solver(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Pg,
    Nesterov,
    Admm,
    All,
}

impl MethodArg {
    fn methods(self) -> Vec<Method> {
        match self {
            MethodArg::Pg => vec![Method::ProjectedGradient],
            MethodArg::Nesterov => vec![Method::Nesterov],
            MethodArg::Admm => vec![Method::Admm],
            MethodArg::All => Method::ALL.to_vec(),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "phaselift", version, about = "Lifted phase retrieval solvers and MDM channel-estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve every row of a measurement file.
    Solve(SolveArgs),
    /// Write a measurement file from a random unitary channel.
    Generate(GenerateArgs),
    /// BER against iteration count at a fixed SNR.
    Convergence(ExperimentArgs),
    /// BER against SNR with penalty summary.
    BerSweep(ExperimentArgs),
    /// Flop totals and operations per second for one channel estimate.
    Flops(ExperimentArgs),
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Measurement file (JSON).
    input: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    method: MethodArg,
    /// Iterations per row; defaults to 70, 30 and 5.
    #[arg(long)]
    iters: Option<usize>,
    /// Output directory for `estimates.json` and `trace.csv`; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, default_value_t = 6)]
    dim: usize,
    #[arg(long, default_value_t = 300)]
    probes: usize,
    #[arg(long, default_value_t = 10.0)]
    lambda: f64,
    /// Noise std on each intensity.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long)]
    seed: u64,
    /// Output directory for `measurements.json` and `truth.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// JSON experiment configuration; fields left out take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; CSV goes to stdout and the summary to stderr if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// SNR grid `start:stop:step` in dB.
    #[arg(long, value_parser = parse_grid)]
    snr_grid: Option<Grid>,
    /// Iteration budget for every selected method.
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    bits: Option<u64>,
}

#[derive(Debug, Clone)]
struct Grid(Vec<f64>);

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, step] = parts.as_slice() else {
        return Err(format!("expected start:stop:step, got {s:?}"));
    };
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    snr_range(num(a)?, num(b)?, num(step)?).map(Grid).map_err(|e| e.to_string())
}

impl ExperimentArgs {
    fn config(&self) -> CliResult<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                ExperimentConfig::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(m) = self.method {
            cfg.methods = m.methods();
        }
        if let Some(seed) = self.seed {
            cfg.seed = Some(seed);
        }
        if let Some(grid) = &self.snr_grid {
            cfg.snr_grid = grid.0.clone();
        }
        if let Some(iters) = self.iters {
            for &m in &cfg.methods.clone() {
                cfg.iterations.set(m, iters);
            }
            cfg.convergence_iters = None;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(b) = self.bits {
            cfg.bits = b;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Writes `name` under `dir`, or to `fallback` when no directory is given.
fn emit(dir: Option<&Path>, name: &str, bytes: &[u8], fallback: &mut dyn Write) -> CliResult<()> {
    match dir {
        Some(d) => {
            fs::create_dir_all(d).map_err(|e| CliError::io(d, e))?;
            let path = d.join(name);
            fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))
        }
        None => fallback.write_all(bytes).map_err(|e| CliError::Io(format!("<stdout>: {e}"))),
    }
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(value).expect("report serializes");
    s.push(b'\n');
    s
}

#[derive(Serialize)]
struct MethodEstimates {
    method: Method,
    iterations: usize,
    /// Row `l` holds `ĥ_l` as `[re, im]` pairs.
    estimates: Vec<Vec<[f64; 2]>>,
    flops: FlopCounter,
    algorithmic_flops: u64,
}

fn solve(args: &SolveArgs) -> CliResult<()> {
    let text = fs::read_to_string(&args.input).map_err(|e| CliError::io(&args.input, e))?;
    let meas = MeasurementSet::from_json(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", args.input.display())))?;
    let mut trace = String::from("method,iteration,total");
    for l in 0..meas.num_rows() {
        trace.push_str(&format!(",row{l}"));
    }
    trace.push('\n');
    let mut all = Vec::new();
    for method in args.method.methods() {
        let mut cfg = SolverConfig::new(method);
        if let Some(iters) = args.iters {
            cfg = cfg.with_iters(iters);
        }
        let res = phaselift::solvers::solve_all_rows(&meas, &cfg)?;
        for k in 0..res.iterations_run {
            let values: Vec<f64> = res.objective_traces.iter().map(|t| t[k]).collect();
            let total: f64 = values.iter().sum();
            trace.push_str(&format!("{method},{},{total}", k + 1));
            for v in values {
                trace.push_str(&format!(",{v}"));
            }
            trace.push('\n');
        }
        all.push(MethodEstimates {
            method,
            iterations: res.iterations_run,
            estimates: res
                .estimates
                .iter()
                .map(|h| h.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
            algorithmic_flops: res.flops.algorithmic(),
            flops: res.flops,
        });
    }
    let dir = args.out.as_deref();
    emit(dir, "estimates.json", &to_json(&all), &mut io::stdout())?;
    emit(dir, "trace.csv", trace.as_bytes(), &mut io::stdout())
}

#[derive(Serialize)]
struct Truth {
    /// Row `l` holds `h_l` as `[re, im]` pairs.
    rows: Vec<Vec<[f64; 2]>>,
}

fn generate(args: &GenerateArgs) -> CliResult<()> {
    use phaselift::sim::derive_seed;
    let channel = generate_channel(args.dim, derive_seed(args.seed, 0, 0))?;
    let training = generate_training(args.probes, args.dim, derive_seed(args.seed, 0, 1));
    let meas = measure_intensities(&channel, &training, args.sigma, args.lambda, derive_seed(args.seed, 0, 2))?;
    let truth = Truth {
        rows: (0..args.dim)
            .map(|l| channel.row_vector(l).iter().map(|z| [z.re, z.im]).collect())
            .collect(),
    };
    let dir = Some(args.out.as_path());
    let mut sink = io::sink();
    emit(dir, "measurements.json", meas.to_json().as_bytes(), &mut sink)?;
    emit(dir, "truth.json", &to_json(&truth), &mut sink)
}

fn experiment(command: &Command) -> CliResult<()> {
    let (args, name) = match command {
        Command::Convergence(a) => (a, "convergence"),
        Command::BerSweep(a) => (a, "ber-sweep"),
        Command::Flops(a) => (a, "flops"),
        _ => unreachable!("not an experiment"),
    };
    let cfg = args.config()?;
    let mut csv = Vec::new();
    let summary = match command {
        Command::Convergence(_) => {
            let r = run_convergence(&cfg)?;
            write_convergence_csv(&mut csv, &r).expect("writing to memory");
            to_json(&serde_json::json!({
                "config": cfg,
                "snr_db": r.snr_db,
                "trials": r.trials,
                "reference_ber": r.reference_ber,
                "crosstalk_free_ber": r.crosstalk_free_ber,
                "iterations_to_reference": r.iterations_to_reference,
            }))
        }
        Command::BerSweep(_) => {
            let r = run_ber_sweep(&cfg)?;
            write_sweep_csv(&mut csv, &r).expect("writing to memory");
            to_json(&serde_json::json!({
                "config": cfg,
                "trials": r.trials,
                "summary": r.summary,
                "crosstalk_free_check": r.crosstalk_free_check,
            }))
        }
        _ => {
            let r = flops_report(&cfg)?;
            write_flops_csv(&mut csv, &r).expect("writing to memory");
            to_json(&r)
        }
    };
    let dir = args.out.as_deref();
    emit(dir, &format!("{name}.csv"), &csv, &mut io::stdout())?;
    emit(dir, &format!("{name}.json"), &summary, &mut io::stderr())
}

fn run(cli: Cli) -> CliResult<()> {
    match &cli.command {
        Command::Solve(a) => solve(a),
        Command::Generate(a) => generate(a),
        other => experiment(other),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("phaselift: {e}");
            ExitCode::from(e.code())
        }
    }
}
