//! Run configuration, execution and the on-disk trace formats.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algorithms::{
    run_douglas_rachford, run_forward_backward, run_incremental, run_projected_subgradient, run_smooth_fb, Algorithm,
    Inexactness, RunSetup, RunTrace, StepSchedule, Thinning,
};
use crate::error::{Error, Result};
use crate::numerics::dist_sq;
use crate::problems::{self, Problem};

pub const TRACE_FORMAT: &str = "fejer-trace/1";
pub const CSV_HEADER: [&str; 6] = [
    "t",
    "f_gap",
    "alpha_t",
    "eps_t",
    "dist_sq_to_ref",
    "max_subgrad_norm_so_far",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: String,
    pub algo: Algorithm,
    pub alpha: f64,
    pub theta: f64,
    pub eps: f64,
    /// Starting radius of the subgradient perturbation when `eps > 0`.
    pub radius: f64,
    #[serde(rename = "T")]
    pub t_count: usize,
    pub seed: u64,
    pub thinning: Thinning,
}

/// A partially specified [`RunConfig`], as read from a config file or flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialRunConfig {
    pub problem: Option<String>,
    pub algo: Option<Algorithm>,
    pub alpha: Option<f64>,
    pub theta: Option<f64>,
    pub eps: Option<f64>,
    pub radius: Option<f64>,
    #[serde(rename = "T")]
    pub t_count: Option<usize>,
    pub seed: Option<u64>,
    pub thinning: Option<Thinning>,
    pub out: Option<PathBuf>,
}

impl PartialRunConfig {
    /// Fields set in `self` win over those in `lower`.
    pub fn over(self, lower: PartialRunConfig) -> PartialRunConfig {
        PartialRunConfig {
            problem: self.problem.or(lower.problem),
            algo: self.algo.or(lower.algo),
            alpha: self.alpha.or(lower.alpha),
            theta: self.theta.or(lower.theta),
            eps: self.eps.or(lower.eps),
            radius: self.radius.or(lower.radius),
            t_count: self.t_count.or(lower.t_count),
            seed: self.seed.or(lower.seed),
            thinning: self.thinning.or(lower.thinning),
            out: self.out.or(lower.out),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Fills the remaining gaps with defaults.
    pub fn resolve(self) -> Result<(RunConfig, Option<PathBuf>)> {
        let cfg = RunConfig {
            problem: self.problem.ok_or_else(|| Error::config("no problem given"))?,
            algo: self.algo.ok_or_else(|| Error::config("no algorithm given"))?,
            alpha: self.alpha.unwrap_or(0.1),
            theta: self.theta.unwrap_or(0.5),
            eps: self.eps.unwrap_or(0.0),
            radius: self.radius.unwrap_or(1.0),
            t_count: self.t_count.unwrap_or(1000),
            seed: self.seed.unwrap_or(0),
            thinning: self.thinning.unwrap_or_default(),
        };
        Ok((cfg, self.out))
    }
}

/// Runs `cfg` on a catalog problem.
pub fn execute(problem: &Problem, cfg: &RunConfig) -> Result<RunTrace> {
    if cfg.problem != problem.id {
        return Err(Error::config(format!(
            "config names {}, got problem {}",
            cfg.problem, problem.id
        )));
    }
    problem.check_algorithm(cfg.algo)?;
    let setup = RunSetup::new(&problem.id, problem.x1.clone())
        .with_reference(problem.x_ref.clone())
        .with_seed(cfg.seed)
        .with_thinning(cfg.thinning);
    let exact_only = |what: &str| {
        if cfg.eps != 0.0 {
            return Err(Error::config(format!("{what} uses exact subgradients; eps must be 0")));
        }
        Ok(())
    };
    match cfg.algo {
        Algorithm::SmoothForwardBackward => {
            exact_only("the smooth method")?;
            run_smooth_fb(&problem.spec, &setup, cfg.t_count)
        }
        algo => {
            let schedule = StepSchedule::polynomial(cfg.alpha, cfg.theta)?;
            match algo {
                Algorithm::ForwardBackward => {
                    let inexact = Inexactness::new(cfg.eps, cfg.radius)?;
                    run_forward_backward(&problem.spec, &setup, schedule, inexact, cfg.t_count)
                }
                Algorithm::ProjectedSubgradient => {
                    let inexact = Inexactness::new(cfg.eps, cfg.radius)?;
                    run_projected_subgradient(&problem.spec, &setup, schedule, inexact, cfg.t_count)
                }
                Algorithm::Incremental => {
                    exact_only("the incremental method")?;
                    run_incremental(&problem.spec, &setup, schedule, cfg.t_count)
                }
                Algorithm::DouglasRachford => {
                    exact_only("Douglas-Rachford")?;
                    run_douglas_rachford(&problem.spec, &setup, schedule, cfg.t_count)
                }
                Algorithm::SmoothForwardBackward => unreachable!(),
            }
        }
    }
}

/// A trace together with what is needed to judge it without the catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFile {
    pub format: String,
    pub f_star: f64,
    /// Analytic subgradient bound of the problem, if declared.
    pub b_declared: Option<f64>,
    /// `‖x_1 − x_ref‖²`.
    pub d_sq: f64,
    #[serde(default)]
    pub config: Option<RunConfig>,
    pub trace: RunTrace,
}

impl TraceFile {
    pub fn new(problem: &Problem, cfg: Option<RunConfig>, trace: RunTrace) -> Self {
        TraceFile {
            format: TRACE_FORMAT.to_string(),
            f_star: problem.f_star,
            b_declared: problem.b_analytic,
            d_sq: problem.d_sq(),
            config: cfg,
            trace,
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let tf: TraceFile = serde_json::from_str(&text)?;
        tf.validate()?;
        Ok(tf)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    /// Structural checks on a trace read from disk.
    pub fn validate(&self) -> Result<()> {
        let tr = &self.trace;
        let n = tr.t_count;
        let bad = |what: &str| Err(Error::Parse(format!("malformed trace: {what}")));
        if self.format != TRACE_FORMAT {
            return bad("unknown format tag");
        }
        if n == 0 {
            return bad("empty trace");
        }
        for (name, len) in [
            ("f_values", tr.f_values.len()),
            ("alpha_values", tr.alpha_values.len()),
            ("eps_values", tr.eps_values.len()),
            ("l_norms", tr.l_norms.len()),
            ("r_norms", tr.r_norms.len()),
        ] {
            if len != n {
                return bad(&format!("{name} has {len} entries, expected {n}"));
            }
        }
        if tr.stored_indices.len() != tr.iterates.len()
            || tr.stored_indices.first() != Some(&1)
            || tr.stored_indices.last() != Some(&n)
            || tr.stored_indices.windows(2).any(|w| w[0] >= w[1])
        {
            return bad("stored indices must increase from 1 to T and match the iterates");
        }
        if tr.dist_sq_to_ref.as_ref().is_some_and(|d| d.len() != n) {
            return bad("dist_sq_to_ref does not cover every iterate");
        }
        if let Some(r) = &tr.reference {
            if r.dim() != tr.iterates[0].dim() {
                return bad("reference dimension differs from the iterates");
            }
        }
        if !self.f_star.is_finite() || !(self.d_sq >= 0.0) {
            return bad("f_star and d_sq must be finite");
        }
        Ok(())
    }
}

/// Builds a [`TraceFile`] for an ad hoc trace whose reference is stored in it.
pub fn trace_file_from(trace: RunTrace, f_star: f64, b_declared: Option<f64>) -> Result<TraceFile> {
    let r = trace
        .reference
        .as_ref()
        .ok_or_else(|| Error::contract("trace carries no reference point"))?;
    let d_sq = dist_sq(&trace.iterates[0], r)?;
    Ok(TraceFile {
        format: TRACE_FORMAT.to_string(),
        f_star,
        b_declared,
        d_sq,
        config: None,
        trace,
    })
}

fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes the per-iteration CSV.
pub fn write_trace_csv(tf: &TraceFile, out: impl Write) -> Result<()> {
    let tr = &tf.trace;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    let running = tr.max_norm_so_far();
    for t in 1..=tr.t_count {
        let dist = tr
            .dist_sq_to_ref
            .as_ref()
            .map(|d| fmt_float(d[t - 1]))
            .unwrap_or_default();
        w.write_record([
            t.to_string(),
            fmt_float(tr.f_values[t - 1] - tf.f_star),
            fmt_float(tr.alpha_values[t - 1]),
            fmt_float(tr.eps_values[t - 1]),
            dist,
            fmt_float(running[t - 1]),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse(format!("{other:?}")),
    }
}

/// `out.csv` → (`out.csv`, `out.json`); a path without extension gets both appended.
pub fn output_pair(out: &Path) -> (PathBuf, PathBuf) {
    match out.extension() {
        Some(ext) if ext == "csv" => (out.to_path_buf(), out.with_extension("json")),
        _ => {
            let base = out.as_os_str().to_owned();
            let mut csv = base.clone();
            csv.push(".csv");
            let mut json = base;
            json.push(".json");
            (PathBuf::from(csv), PathBuf::from(json))
        }
    }
}

/// Runs a configuration end to end and writes its CSV and JSON outputs.
pub fn run_to_files(cfg: &RunConfig, out: &Path) -> Result<TraceFile> {
    let problem = problems::problem(&cfg.problem)?;
    let trace = execute(&problem, cfg)?;
    let tf = TraceFile::new(&problem, Some(cfg.clone()), trace);
    let (csv_path, json_path) = output_pair(out);
    if let Some(dir) = csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut buf = Vec::new();
    write_trace_csv(&tf, &mut buf)?;
    fs::write(&csv_path, buf)?;
    tf.write(&json_path)?;
    Ok(tf)
}
