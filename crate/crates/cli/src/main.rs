//! `mfrc`: command-line driver for the mean-field random-cluster simulator.
//!
//! Exit codes: 0 success, 2 usage error, 3 numerical failure, 4 step budget
//! exhausted (the output is still written).

mod config;
mod output;

use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use mfrc::dynamics::{run_trajectory_streaming, DynamicsKind, InitState, TraceRow};
use mfrc::exact::ExactReport;
use mfrc::experiments::{
    binomial_coupling_experiment, drift_validation, escape_times, identity_coupling_experiment,
    tv_mixing_estimate, Band, Start,
};
use mfrc::phase::{CriticalPoints, Drift};
use mfrc::stats::censored_median;
use mfrc::{Error, ModelParams, RngStream};

use output::{CsvWriter, Provenance};

#[derive(Debug, Parser)]
#[command(name = "mfrc", version, about = "Mean-field random-cluster dynamics and phase structure")]
struct Cli {
    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for replica pools (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// `key = value` file whose keys are flag names; flags win on conflict.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output path; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Critical values and fixed points for (q, λ).
    CriticalPoints(CriticalArgs),
    /// Table of φ, f and f' over the drift domain.
    DriftScan(DriftScanArgs),
    /// Trajectory of one chain as a CSV trace.
    Simulate(SimulateArgs),
    /// Binomial or identity coupling experiment.
    Coupling(CouplingArgs),
    /// Exact transition matrices and spectral checks on a tiny graph.
    Exact(ExactArgs),
    /// TV-distance mixing proxy from the full and empty starts.
    MixEstimate(MixArgs),
    /// Escape times of L1/n from a band.
    Escape(EscapeArgs),
    /// Conditional one-step drift against φ.
    ValidateDrift(ValidateDriftArgs),
}

#[derive(Debug, Args, Serialize)]
struct ModelArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    q: f64,
    #[arg(long)]
    lambda: f64,
}

impl ModelArgs {
    fn params(&self) -> mfrc::Result<ModelParams> {
        ModelParams::new(self.n, self.q, self.lambda)
    }
}

#[derive(Debug, Args, Serialize)]
struct CriticalArgs {
    #[arg(long)]
    q: f64,
    /// Defaults to λ_S = q.
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
struct DriftScanArgs {
    #[arg(long)]
    q: f64,
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 1000)]
    grid: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum DynamicsArg {
    Cm,
    CmEdges,
    Hb,
    Su,
}

impl From<DynamicsArg> for DynamicsKind {
    fn from(d: DynamicsArg) -> Self {
        match d {
            DynamicsArg::Cm => DynamicsKind::Cm,
            DynamicsArg::CmEdges => DynamicsKind::CmEdges,
            DynamicsArg::Hb => DynamicsKind::Hb,
            DynamicsArg::Su => DynamicsKind::Su,
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    dynamics: DynamicsArg,
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
    #[arg(long)]
    steps: u64,
    #[arg(long, default_value_t = 1)]
    record_every: u64,
    /// `empty`, `full` or `giant:<theta>`.
    #[arg(long, default_value = "empty")]
    init: String,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum CouplingMode {
    Binomial,
    Identity,
}

#[derive(Debug, Args, Serialize)]
struct CouplingArgs {
    #[arg(long, value_enum)]
    mode: CouplingMode,
    /// Binomial: number of trials per draw.
    #[arg(long)]
    m: Option<u64>,
    /// Binomial: success probability.
    #[arg(long, default_value_t = 0.5)]
    r: f64,
    /// Binomial: target difference Y − X.
    #[arg(long)]
    y: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Number of draws (binomial) or coupled runs (identity).
    #[arg(long)]
    replicas: usize,
    /// Identity: step budget per run.
    #[arg(long)]
    max_steps: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
struct ExactArgs {
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
    /// Report path; falls back to `--out`.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct MixArgs {
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
    #[arg(long)]
    replicas: usize,
    #[arg(long)]
    t_max: u64,
    /// Histogram bins on [0, 1]; √replicas when absent.
    #[arg(long)]
    bins: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
struct EscapeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
    #[arg(long)]
    theta0: f64,
    #[arg(long)]
    band_lo: f64,
    #[arg(long, default_value_t = 1.0)]
    band_hi: f64,
    #[arg(long)]
    max_steps: u64,
    #[arg(long)]
    replicas: usize,
}

#[derive(Debug, Args, Serialize)]
struct ValidateDriftArgs {
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
    /// Comma-separated θ values.
    #[arg(long, value_delimiter = ',', required = true)]
    thetas: Vec<f64>,
    #[arg(long)]
    replicas: usize,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numerical(String),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::SolverFailure(_) | Error::NotReversible(_) => Self::Numerical(e.to_string()),
            other => Self::Usage(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::Io(e)
    }
}

#[derive(Debug, PartialEq, Eq)]
enum Outcome {
    Done,
    BudgetExhausted,
}

type Run = Result<Outcome, Failure>;

fn critical_points(a: &CriticalArgs, seed: u64, out: Option<&Path>) -> Run {
    let lambda = a.lambda.unwrap_or(a.q);
    let cp = CriticalPoints::compute(a.q, lambda)?;
    output::write_json(out, &Provenance::new("critical-points", seed, a), &cp)?;
    Ok(Outcome::Done)
}

fn drift_scan(a: &DriftScanArgs, seed: u64, out: Option<&Path>) -> Run {
    if a.grid < 2 {
        return Err(Failure::Usage("--grid must be at least 2".into()));
    }
    let scan = Drift::new(a.q, a.lambda)?.scan(a.grid);
    let prov = Provenance::new("drift-scan", seed, a);
    let mut w = CsvWriter::create(out, &prov, "theta,phi,f,f_prime")?;
    for r in &scan.rows {
        w.floats(&[r.theta, r.phi, r.f, r.f_prime])?;
    }
    w.finish()?;
    Ok(Outcome::Done)
}

fn simulate(a: &SimulateArgs, seed: u64, out: Option<&Path>) -> Run {
    let params = a.model.params()?;
    let kind = DynamicsKind::from(a.dynamics);
    let init = InitState::standard(&a.init, params.n(), kind)?;
    let prov = Provenance::new("simulate", seed, a);
    let mut w = CsvWriter::create(out, &prov, TraceRow::CSV_HEADER)?;
    let mut rng = RngStream::new(seed);
    let mut io_err = None;
    run_trajectory_streaming(kind, init, &params, a.steps, a.record_every, &mut rng, |row| {
        if io_err.is_none() {
            io_err = w.line(&row.to_csv()).err();
        }
    })?;
    if let Some(e) = io_err {
        return Err(e.into());
    }
    w.finish()?;
    Ok(Outcome::Done)
}

fn coupling(a: &CouplingArgs, seed: u64, out: Option<&Path>) -> Run {
    let need = |name: &str| Failure::Usage(format!("--mode {:?} requires --{name}", a.mode));
    let prov = Provenance::new("coupling", seed, a);
    let rng = RngStream::new(seed);
    match a.mode {
        CouplingMode::Binomial => {
            let m = a.m.ok_or_else(|| need("m"))?;
            let y = a.y.ok_or_else(|| need("y"))?;
            if !(0.0..=1.0).contains(&a.r) || y > m || a.replicas == 0 {
                return Err(Failure::Usage("need 0 <= r <= 1, y <= m and replicas >= 1".into()));
            }
            let s = binomial_coupling_experiment(m, a.r, y, a.replicas, &rng);
            let result = json!({
                "mode": "binomial",
                "params": { "m": m, "r": a.r, "y": y },
                "replicas": s.trials,
                "success_rate": s.success_rate,
            });
            output::write_json(out, &prov, &result)?;
            Ok(Outcome::Done)
        }
        CouplingMode::Identity => {
            let params = ModelParams::new(
                a.n.ok_or_else(|| need("n"))?,
                a.q.ok_or_else(|| need("q"))?,
                a.lambda.ok_or_else(|| need("lambda"))?,
            )?;
            let max_steps = a.max_steps.ok_or_else(|| need("max-steps"))?;
            let s = identity_coupling_experiment(&params, a.replicas, max_steps, &rng)?;
            let timeouts = s.times.iter().filter(|t| t.is_none()).count();
            let result = json!({
                "mode": "identity",
                "params": { "n": params.n(), "q": params.q(), "lambda": params.lambda(), "max_steps": max_steps },
                "replicas": s.replicas,
                "median_time": s.median_time,
                "fix_frequency": s.fix_frequency,
                "timeouts": timeouts,
                "times": s.times,
            });
            output::write_json(out, &prov, &result)?;
            Ok(if s.median_time.is_some() { Outcome::Done } else { Outcome::BudgetExhausted })
        }
    }
}

fn exact(a: &ExactArgs, seed: u64, out: Option<&Path>) -> Run {
    let params = a.model.params()?;
    let report = ExactReport::compute(a.model.n, &params, &mut RngStream::new(seed))?;
    let result = json!({ "all_pass": report.all_pass(), "report": report });
    let path = a.report.as_deref().or(out);
    output::write_json(path, &Provenance::new("exact", seed, a), &result)?;
    Ok(Outcome::Done)
}

fn mix_estimate(a: &MixArgs, seed: u64, out: Option<&Path>) -> Run {
    let params = a.model.params()?;
    if a.bins == Some(0) {
        return Err(Failure::Usage("--bins must be positive".into()));
    }
    let run = tv_mixing_estimate(
        &params,
        (Start::Full, Start::Empty),
        a.t_max,
        a.replicas,
        a.bins,
        &RngStream::new(seed),
    )?;
    output::write_json(out, &Provenance::new("mix-estimate", seed, a), &run)?;
    Ok(if run.mixing_proxy.is_some() { Outcome::Done } else { Outcome::BudgetExhausted })
}

fn escape(a: &EscapeArgs, seed: u64, out: Option<&Path>) -> Run {
    let params = a.model.params()?;
    let band = Band { lo: a.band_lo, hi: a.band_hi };
    let times = escape_times(&params, a.theta0, band, a.max_steps, a.replicas, &RngStream::new(seed))?;
    let median = censored_median(&times);
    let escaped = times.iter().filter(|t| t.is_some()).count();
    let result = json!({
        "replicas": a.replicas,
        "escaped": escaped,
        "median_time": median,
        "times": times,
    });
    output::write_json(out, &Provenance::new("escape", seed, a), &result)?;
    Ok(if median.is_some() { Outcome::Done } else { Outcome::BudgetExhausted })
}

fn validate_drift(a: &ValidateDriftArgs, seed: u64, out: Option<&Path>) -> Run {
    let params = a.model.params()?;
    if a.replicas == 0 {
        return Err(Failure::Usage("--replicas must be positive".into()));
    }
    let points = drift_validation(&params, &a.thetas, a.replicas, &RngStream::new(seed))?;
    let prov = Provenance::new("validate-drift", seed, a);
    let mut w = CsvWriter::create(out, &prov, "theta,empirical,std_err,phi,gap")?;
    for p in &points {
        w.floats(&[p.theta, p.empirical, p.std_err, p.phi, p.gap])?;
    }
    w.finish()?;
    Ok(Outcome::Done)
}

fn run(cli: &Cli) -> Run {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let (seed, out) = (cli.seed, cli.out.as_deref());
    match &cli.command {
        Command::CriticalPoints(a) => critical_points(a, seed, out),
        Command::DriftScan(a) => drift_scan(a, seed, out),
        Command::Simulate(a) => simulate(a, seed, out),
        Command::Coupling(a) => coupling(a, seed, out),
        Command::Exact(a) => exact(a, seed, out),
        Command::MixEstimate(a) => mix_estimate(a, seed, out),
        Command::Escape(a) => escape(a, seed, out),
        Command::ValidateDrift(a) => validate_drift(a, seed, out),
    }
}

fn main() -> ExitCode {
    let args = match config::merge(std::env::args().collect()) {
        Ok(a) => a,
        Err(config::ConfigError(msg)) => {
            eprintln!("error: config: {msg}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(&cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::BudgetExhausted) => {
            eprintln!("warning: step budget exhausted before the target was reached");
            ExitCode::from(4)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
