//! Certificates, bound comparisons and slope fits computed from trace files.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algorithms::{best_iterate, Algorithm, StepSchedule};
use crate::error::{Error, Result};
use crate::fejer::{self, CertificateConstants, FejerCertificate, TestPoint};
use crate::rates::{self, c_theta, PolySchedule};

use super::run::{csv_err, TraceFile};

/// Certifies a trace with `constants`, or with the constants of the method
/// that produced it.
///
/// The reference point is always a test point. Stored iterates are added
/// when every `ξ_t` is positive: with `ξ_t = 0` the test point `x = x_t`
/// would demand `x_{t+1} = x_t`.
pub fn certify_trace(
    tf: &TraceFile,
    constants: Option<CertificateConstants>,
    tol_rel: f64,
) -> Result<FejerCertificate> {
    let tr = &tf.trace;
    let constants = match constants {
        Some(c) => c,
        None => CertificateConstants::for_trace(tr, tf.b_declared)?,
    };
    let reference = tr
        .reference
        .clone()
        .ok_or_else(|| Error::contract("trace carries no reference point"))?;
    let mut points = vec![TestPoint::reference(reference, tf.f_star)];
    let steps = tr.t_count.saturating_sub(1).min(constants.xi.len());
    if constants.xi[..steps].iter().all(|&x| x > 0.0) {
        points.extend(fejer::iterate_test_points(tr));
    }
    fejer::certify(tr, &constants, &points, tol_rel)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Theorem {
    Thm22,
    Cor23,
    Thm24,
    Thm32,
    Thm35,
    Thm37,
    Thm310,
    Prop33,
}

impl Theorem {
    pub const ALL: [Theorem; 8] = [
        Theorem::Thm22,
        Theorem::Cor23,
        Theorem::Thm24,
        Theorem::Thm32,
        Theorem::Thm35,
        Theorem::Thm37,
        Theorem::Thm310,
        Theorem::Prop33,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Theorem::Thm22 => "thm22",
            Theorem::Cor23 => "cor23",
            Theorem::Thm24 => "thm24",
            Theorem::Thm32 => "thm32",
            Theorem::Thm35 => "thm35",
            Theorem::Thm37 => "thm37",
            Theorem::Thm310 => "thm310",
            Theorem::Prop33 => "prop33",
        }
    }

    /// The method a method-specific bound belongs to.
    pub fn method(self) -> Option<Algorithm> {
        match self {
            Theorem::Thm32 => Some(Algorithm::ForwardBackward),
            Theorem::Thm35 => Some(Algorithm::ProjectedSubgradient),
            Theorem::Thm37 => Some(Algorithm::Incremental),
            Theorem::Thm310 => Some(Algorithm::DouglasRachford),
            Theorem::Prop33 => Some(Algorithm::SmoothForwardBackward),
            Theorem::Thm22 | Theorem::Cor23 | Theorem::Thm24 => None,
        }
    }

    /// Smallest horizon `T` at which the bound is stated.
    pub fn first_t(self) -> usize {
        match self {
            Theorem::Thm22 | Theorem::Cor23 | Theorem::Prop33 => 2,
            Theorem::Thm24 => 3,
            Theorem::Thm32 | Theorem::Thm35 | Theorem::Thm37 | Theorem::Thm310 => 4,
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Theorem::ALL
            .into_iter()
            .find(|t| t.id() == s)
            .ok_or_else(|| Error::config(format!("unknown theorem '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    #[serde(rename = "T")]
    pub t: usize,
    pub empirical_gap: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSummary {
    pub theorem: Theorem,
    pub max_ratio: f64,
    #[serde(rename = "first_violation_T")]
    pub first_violation_t: Option<usize>,
    #[serde(rename = "T_min")]
    pub t_min: usize,
    #[serde(rename = "T_max")]
    pub t_max: usize,
    /// Subgradient bound used, for the bounds that need one.
    pub b: Option<f64>,
    pub d_sq: f64,
}

/// The subgradient bound used for certificates and rate bounds.
pub fn effective_b(tf: &TraceFile) -> Result<f64> {
    match tf.b_declared {
        Some(b) => Ok(b),
        None => fejer::observed_b(&tf.trace),
    }
}

fn polynomial_params(tf: &TraceFile, theorem: Theorem) -> Result<(f64, f64)> {
    match tf.trace.schedule {
        StepSchedule::Polynomial { alpha, theta } => Ok((alpha, theta)),
        StepSchedule::Constant { .. } => Err(Error::config(format!("{theorem} needs a polynomial step schedule"))),
    }
}

/// `d²/(2α)·T^{θ−1} + K·c_{2θ}·(ln T)^{[2θ ≤ 1]}·T^{−min(θ, 1−θ)}`.
fn method_bound(d_sq: f64, alpha: f64, theta: f64, k: f64, t: usize) -> f64 {
    let n = t as f64;
    let log = if 2.0 * theta <= 1.0 { n.ln() } else { 1.0 };
    d_sq / (2.0 * alpha) * n.powf(theta - 1.0) + k * c_theta(2.0 * theta) * log * n.powf(-theta.min(1.0 - theta))
}

/// Evaluates `theorem` along the trace for every horizon it covers.
pub fn bound_rows(tf: &TraceFile, theorem: Theorem) -> Result<(Vec<BoundRow>, BoundSummary)> {
    let tr = &tf.trace;
    if let Some(method) = theorem.method() {
        if tr.algo != method {
            return Err(Error::config(format!(
                "{theorem} applies to {method} traces, this trace is {}",
                tr.algo
            )));
        }
    }
    let t_min = theorem.first_t();
    if tr.t_count < t_min {
        return Err(Error::Validity(format!(
            "{theorem} needs T >= {t_min}, trace has {}",
            tr.t_count
        )));
    }
    let d_sq = tf.d_sq;
    let mut b_used = None;
    let bounds: Vec<f64> = match theorem {
        Theorem::Thm22 | Theorem::Cor23 | Theorem::Thm24 => {
            let c = CertificateConstants::for_trace(tr, tf.b_declared)?;
            b_used = c.b;
            match theorem {
                Theorem::Thm22 => rates::bound_thm22_curve(d_sq, &c.eta, &c.xi)?,
                Theorem::Cor23 => {
                    if c.xi.iter().any(|&x| x != 0.0) {
                        return Err(Error::config("cor23 needs xi = 0 throughout"));
                    }
                    (2..=tr.t_count)
                        .map(|t| rates::bound_cor23(d_sq, c.eta[t - 1], t))
                        .collect()
                }
                _ => {
                    let sched = induced_poly_schedule(tf, &c)?;
                    (3..=tr.t_count)
                        .map(|t| rates::bound_thm24(d_sq, &sched, t))
                        .collect::<Result<_>>()?
                }
            }
        }
        Theorem::Prop33 => {
            let step = match tr.schedule {
                StepSchedule::Constant { step } => step,
                _ => return Err(Error::config("prop33 needs a constant step")),
            };
            let beta = 1.0 / step;
            (2..=tr.t_count).map(|t| beta * d_sq / (2.0 * t as f64)).collect()
        }
        _ => {
            let (alpha, theta) = polynomial_params(tf, theorem)?;
            let b = effective_b(tf)?;
            b_used = Some(b);
            let eps = tr.inexactness.eps;
            let m = tr.m as f64;
            let k = match theorem {
                Theorem::Thm32 => alpha * (5.0 * b * b + eps),
                Theorem::Thm35 => alpha * (b * b + 2.0 * eps),
                Theorem::Thm37 => alpha * (4.0 * m + 5.0) * m * b * b / 2.0,
                _ => 8.0 * alpha * b * b,
            };
            (t_min..=tr.t_count)
                .map(|t| method_bound(d_sq, alpha, theta, k, t))
                .collect()
        }
    };
    let first = tr.t_count + 1 - bounds.len();
    let rows: Vec<BoundRow> = bounds
        .iter()
        .enumerate()
        .map(|(k, &bound)| {
            let t = first + k;
            let gap = tr.f_value(t) - tf.f_star;
            let ratio = if bound > 0.0 {
                gap / bound
            } else if gap > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            BoundRow {
                t,
                empirical_gap: gap,
                bound,
                ratio,
            }
        })
        .filter(|r| r.t >= t_min)
        .collect();
    let max_ratio = rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    let first_violation_t = rows.iter().find(|r| r.empirical_gap > r.bound).map(|r| r.t);
    let summary = BoundSummary {
        theorem,
        max_ratio,
        first_violation_t,
        t_min,
        t_max: tr.t_count,
        b: b_used,
        d_sq,
    };
    Ok((rows, summary))
}

/// The polynomial schedule whose exact sequences are the trace's certificate
/// constants: `η_t = 2α t^{−θ}` with `ξ_t = K α² t^{−2θ}`, or the constant
/// smooth sequences.
fn induced_poly_schedule(tf: &TraceFile, c: &CertificateConstants) -> Result<PolySchedule> {
    match tf.trace.schedule {
        StepSchedule::Polynomial { alpha, theta } => {
            let coeff = if alpha > 0.0 { c.xi[0] / (alpha * alpha) } else { 0.0 };
            PolySchedule::new(2.0 * alpha, theta, coeff * alpha * alpha, 2.0 * theta)
        }
        StepSchedule::Constant { .. } => PolySchedule::new(c.eta[0], 0.0, c.xi[0], 0.0),
    }
}

pub fn write_bound_csv(rows: &[BoundRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["T", "empirical_gap", "bound", "ratio"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.t.to_string(),
            format!("{:.16e}", r.empirical_gap),
            format!("{:.16e}", r.bound),
            format!("{:.16e}", r.ratio),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Gaps at or below this multiple of machine epsilon (relative to `1 + |f*|`)
/// are treated as converged.
pub const NOISE_FLOOR_ULPS: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum SlopeFit {
    Slope { slope: f64, intercept: f64 },
    Converged,
}

impl SlopeFit {
    pub fn slope(&self) -> Option<f64> {
        match self {
            SlopeFit::Slope { slope, .. } => Some(*slope),
            SlopeFit::Converged => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeReport {
    pub window: f64,
    pub t_from: usize,
    pub t_to: usize,
    pub last_iterate: SlopeFit,
    pub best_iterate: SlopeFit,
    /// `|last − best|` when both curves produced a slope.
    pub difference: Option<f64>,
    pub best_index: usize,
}

pub const MIN_SLOPE_T: usize = 1000;

/// Least-squares slope of `log(gap)` against `log(T)` over `T ∈ [T_max/window, T_max]`,
/// for the last iterate and for the best iterate so far.
pub fn slope(tf: &TraceFile, window: f64) -> Result<SlopeReport> {
    let tr = &tf.trace;
    if tr.t_count < MIN_SLOPE_T {
        return Err(Error::Validity(format!(
            "slope needs T >= {MIN_SLOPE_T}, trace has {}",
            tr.t_count
        )));
    }
    if !(window > 1.0 && window.is_finite()) {
        return Err(Error::config(format!("window must exceed 1, got {window}")));
    }
    let t_to = tr.t_count;
    let t_from = ((t_to as f64 / window).ceil() as usize).max(1);
    let floor = NOISE_FLOOR_ULPS * f64::EPSILON * (1.0 + tf.f_star.abs());
    let last: Vec<f64> = tr.f_values.iter().map(|f| f - tf.f_star).collect();
    let mut best_so_far = f64::INFINITY;
    let best: Vec<f64> = last
        .iter()
        .map(|&g| {
            best_so_far = best_so_far.min(g);
            best_so_far
        })
        .collect();
    let (best_index, _) = best_iterate(tr)?;
    let last_fit = fit(&last, t_from, t_to, floor);
    let best_fit = fit(&best, t_from, t_to, floor);
    let difference = match (last_fit.slope(), best_fit.slope()) {
        (Some(a), Some(b)) => Some((a - b).abs()),
        _ => None,
    };
    Ok(SlopeReport {
        window,
        t_from,
        t_to,
        last_iterate: last_fit,
        best_iterate: best_fit,
        difference,
        best_index,
    })
}

fn fit(gaps: &[f64], t_from: usize, t_to: usize, floor: f64) -> SlopeFit {
    let window = &gaps[t_from - 1..t_to];
    if window.iter().any(|&g| g <= floor) {
        return SlopeFit::Converged;
    }
    let n = window.len() as f64;
    let xs: Vec<f64> = (t_from..=t_to).map(|t| (t as f64).ln()).collect();
    let ys: Vec<f64> = window.iter().map(|g| g.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == 0.0 {
        return SlopeFit::Converged;
    }
    let slope = sxy / sxx;
    SlopeFit::Slope {
        slope,
        intercept: my - slope * mx,
    }
}
