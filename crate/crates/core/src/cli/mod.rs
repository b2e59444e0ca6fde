//! The `fejer` command-line harness.
//!
//! Exit codes: 0 success, 1 a certificate or bound check failed, 2 bad
//! configuration or unreadable input, 3 a run hit an oracle or domain error.

mod report;
mod run;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::algorithms::{Algorithm, Thinning};
use crate::error::{Error, Result};
use crate::fejer::{CertificateConstants, Verdict, DEFAULT_TOL_REL};
use crate::problems;

pub use report::{
    bound_rows, certify_trace, effective_b, slope, write_bound_csv, BoundRow, BoundSummary, SlopeFit, SlopeReport,
    Theorem, MIN_SLOPE_T, NOISE_FLOOR_ULPS,
};
pub use run::{
    execute, output_pair, run_to_files, trace_file_from, write_trace_csv, PartialRunConfig, RunConfig, TraceFile,
    CSV_HEADER, TRACE_FORMAT,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "fejer",
    version,
    about = "Splitting methods with Fejér certificates and rate-bound checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one method on a catalog problem and write a CSV trace plus JSON sidecar.
    Run(RunArgs),
    /// Check the modified Fejér inequality along a trace.
    Certify(CertifyArgs),
    /// Compare the empirical gap curve with a closed-form bound.
    Bounds(BoundsArgs),
    /// Fit log-log slopes of the last-iterate and best-iterate gap curves.
    Slope(SlopeArgs),
    /// Execute a JSON list of run configurations.
    Sweep(SweepArgs),
    /// Print the problem catalog as JSON.
    Catalog(CatalogArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long)]
    pub algo: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Starting radius of the subgradient perturbation used when eps > 0.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long = "T", visible_alias = "iters")]
    pub t_count: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// auto, full or geometric.
    #[arg(long)]
    pub thinning: Option<String>,
    /// Output path; `x.csv` writes `x.csv` and `x.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file with any of the fields above; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    /// JSON trace written by `run`.
    pub trace: PathBuf,
    /// JSON file with `eta`, `xi` and `provenance`; defaults to the constants of
    /// the method that produced the trace.
    #[arg(long)]
    pub constants: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TOL_REL)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    pub trace: PathBuf,
    /// One of thm22, cor23, thm24, thm32, thm35, thm37, thm310, prop33.
    #[arg(long)]
    pub theorem: String,
    /// CSV path; the summary goes next to it as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SlopeArgs {
    pub trace: PathBuf,
    /// Ratio between the last and first T of the fitted window.
    #[arg(long, default_value_t = 10.0)]
    pub window: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// JSON array of run configurations, each with an `out` path.
    pub configs: PathBuf,
}

#[derive(Debug, Args)]
pub struct CatalogArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    dispatch(cli.command)
}

pub fn dispatch(command: Command) -> i32 {
    let (outcome, domain_exit) = match command {
        Command::Run(a) => (cmd_run(a), EXIT_DOMAIN),
        Command::Certify(a) => (cmd_certify(a), EXIT_CONFIG),
        Command::Bounds(a) => (cmd_bounds(a), EXIT_CONFIG),
        Command::Slope(a) => (cmd_slope(a), EXIT_CONFIG),
        Command::Sweep(a) => (cmd_sweep(a), EXIT_DOMAIN),
        Command::Catalog(a) => (cmd_catalog(a), EXIT_CONFIG),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Domain(_) | Error::Contract(_) | Error::DimensionMismatch { .. } => domain_exit,
                _ => EXIT_CONFIG,
            }
        }
    }
}

fn emit_json(value: &impl Serialize, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    if let Some(path) = out {
        fs::write(path, &text)?;
    }
    std::io::stdout().write_all(text.as_bytes())?;
    Ok(())
}

fn run_flags(a: RunArgs) -> Result<(PartialRunConfig, Option<PathBuf>)> {
    let flags = PartialRunConfig {
        problem: a.problem,
        algo: a.algo.as_deref().map(str::parse::<Algorithm>).transpose()?,
        alpha: a.alpha,
        theta: a.theta,
        eps: a.eps,
        radius: a.radius,
        t_count: a.t_count,
        seed: a.seed,
        thinning: a.thinning.as_deref().map(str::parse::<Thinning>).transpose()?,
        out: a.out,
    };
    Ok((flags, a.config))
}

fn cmd_run(a: RunArgs) -> Result<i32> {
    let (flags, config_path) = run_flags(a)?;
    let file = match config_path {
        Some(p) => PartialRunConfig::from_file(&p).map_err(|e| match e {
            Error::Io(io) => Error::config(format!("cannot read {}: {io}", p.display())),
            other => other,
        })?,
        None => PartialRunConfig::default(),
    };
    let (cfg, out) = flags.over(file).resolve()?;
    let out = out.unwrap_or_else(|| PathBuf::from(format!("{}_{}.csv", cfg.problem, cfg.algo)));
    let tf = run_to_files(&cfg, &out)?;
    let (csv_path, json_path) = output_pair(&out);
    eprintln!(
        "{} on {}: T = {}, final gap {:.6e}; wrote {} and {}",
        cfg.algo,
        cfg.problem,
        tf.trace.t_count,
        tf.trace.f_value(tf.trace.t_count) - tf.f_star,
        csv_path.display(),
        json_path.display()
    );
    Ok(EXIT_OK)
}

fn read_trace(path: &Path) -> Result<TraceFile> {
    TraceFile::read(path).map_err(|e| match e {
        Error::Io(io) => Error::Parse(format!("cannot read {}: {io}", path.display())),
        other => other,
    })
}

fn cmd_certify(a: CertifyArgs) -> Result<i32> {
    let tf = read_trace(&a.trace)?;
    let constants = match &a.constants {
        Some(p) => {
            let text =
                fs::read_to_string(p).map_err(|io| Error::Parse(format!("cannot read {}: {io}", p.display())))?;
            Some(serde_json::from_str::<CertificateConstants>(&text)?)
        }
        None => None,
    };
    let cert = certify_trace(&tf, constants, a.tol)?;
    emit_json(&cert, a.out.as_deref())?;
    Ok(match cert.verdict {
        Verdict::Pass => EXIT_OK,
        Verdict::Fail => EXIT_CHECK_FAILED,
    })
}

fn cmd_bounds(a: BoundsArgs) -> Result<i32> {
    let theorem: Theorem = a.theorem.parse()?;
    let tf = read_trace(&a.trace)?;
    let (rows, summary) = bound_rows(&tf, theorem)?;
    let out = a
        .out
        .unwrap_or_else(|| PathBuf::from(format!("{}_{}_{theorem}.csv", tf.trace.problem_id, tf.trace.algo)));
    let (csv_path, json_path) = output_pair(&out);
    let mut buf = Vec::new();
    write_bound_csv(&rows, &mut buf)?;
    fs::write(&csv_path, buf)?;
    emit_json(&summary, Some(&json_path))?;
    Ok(if summary.first_violation_t.is_some() {
        EXIT_CHECK_FAILED
    } else {
        EXIT_OK
    })
}

fn cmd_slope(a: SlopeArgs) -> Result<i32> {
    let tf = read_trace(&a.trace)?;
    let report = slope(&tf, a.window)?;
    emit_json(&report, a.out.as_deref())?;
    Ok(EXIT_OK)
}

fn cmd_sweep(a: SweepArgs) -> Result<i32> {
    let text = fs::read_to_string(&a.configs)
        .map_err(|io| Error::config(format!("cannot read {}: {io}", a.configs.display())))?;
    let entries: Vec<PartialRunConfig> = serde_json::from_str(&text)?;
    let mut jobs = Vec::with_capacity(entries.len());
    for (i, e) in entries.into_iter().enumerate() {
        let (cfg, out) = e.resolve()?;
        let out = out.ok_or_else(|| Error::config(format!("sweep entry {i} has no out path")))?;
        jobs.push((cfg, out));
    }
    let mut outs: Vec<&PathBuf> = jobs.iter().map(|(_, o)| o).collect();
    outs.sort();
    if outs.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::config("sweep entries must write to distinct out paths"));
    }
    let codes: Vec<i32> = jobs
        .par_iter()
        .map(|(cfg, out)| match run_to_files(cfg, out) {
            Ok(_) => EXIT_OK,
            Err(e) => {
                eprintln!("error in {}: {e}", out.display());
                match e {
                    Error::Domain(_) | Error::Contract(_) | Error::DimensionMismatch { .. } => EXIT_DOMAIN,
                    _ => EXIT_CONFIG,
                }
            }
        })
        .collect();
    Ok(codes.into_iter().max().unwrap_or(EXIT_OK))
}

fn cmd_catalog(a: CatalogArgs) -> Result<i32> {
    let all: Vec<_> = problems::catalog()?.iter().map(|p| p.descriptor()).collect();
    emit_json(&all, a.out.as_deref())?;
    Ok(EXIT_OK)
}
