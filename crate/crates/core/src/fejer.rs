//! Runtime certificates for modified Fejér monotonicity.
//!
//! A run passes when, for every consecutive pair `(x_t, x_{t+1})` and every
//! test point `x`,
//! `‖x_{t+1} − x‖² ≤ ‖x_t − x‖² − η_t (f(x_t) − f(x)) + ξ_t`
//! up to a relative tolerance. The step-distance consequence
//! `‖x_{t+1} − x_t‖² ≤ ξ_t` is reported alongside.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{Algorithm, RunTrace, StepSchedule};
use crate::error::{Error, Result};
use crate::numerics::{dist_sq, Point};

pub const DEFAULT_TOL_REL: f64 = 1e-9;

/// Where a pair of `(η_t, ξ_t)` sequences comes from. The serialized names are
/// part of the certificate format.
#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    FB_thm32,
    PS_thm35,
    INC_thm37,
    DR_thm310,
    SMOOTH_prop33,
    CUSTOM,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// `η_t` and `ξ_t`, stored at index `t − 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateConstants {
    pub eta: Vec<f64>,
    pub xi: Vec<f64>,
    pub provenance: Provenance,
    /// The subgradient bound the sequences were built from, if any.
    pub b: Option<f64>,
    /// Set when recorded subgradient norms exceed the declared `b`.
    #[serde(default)]
    pub conditional: bool,
}

impl CertificateConstants {
    /// `η_t = 2α_t`, `ξ_t = (10B² + 2ε) α_t²`.
    pub fn forward_backward(alphas: &[f64], b: f64, eps: f64) -> Self {
        Self::two_alpha(alphas, 10.0 * b * b + 2.0 * eps, Provenance::FB_thm32, b)
    }

    /// The forward-backward constants with `r` the indicator of the feasible set.
    pub fn projected_subgradient(alphas: &[f64], b: f64, eps: f64) -> Self {
        Self::two_alpha(alphas, 10.0 * b * b + 2.0 * eps, Provenance::PS_thm35, b)
    }

    /// `η_t = 2α_t`, `ξ_t = (4m + 5) m B² α_t²`.
    pub fn incremental(alphas: &[f64], m: usize, b: f64) -> Self {
        let m = m as f64;
        Self::two_alpha(alphas, (4.0 * m + 5.0) * m * b * b, Provenance::INC_thm37, b)
    }

    /// `η_t = 2α_t`, `ξ_t = 16 α_t² B²`.
    pub fn douglas_rachford(alphas: &[f64], b: f64) -> Self {
        Self::two_alpha(alphas, 16.0 * b * b, Provenance::DR_thm310, b)
    }

    /// `η_t = 2/β`, `ξ_t = 0`.
    pub fn smooth(beta: f64, len: usize) -> Self {
        CertificateConstants {
            eta: vec![2.0 / beta; len],
            xi: vec![0.0; len],
            provenance: Provenance::SMOOTH_prop33,
            b: None,
            conditional: false,
        }
    }

    pub fn custom(eta: Vec<f64>, xi: Vec<f64>) -> Result<Self> {
        if eta.len() != xi.len() {
            return Err(Error::contract("eta and xi must have the same length"));
        }
        if eta.iter().chain(&xi).any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::contract("eta and xi must be finite and nonnegative"));
        }
        Ok(CertificateConstants {
            eta,
            xi,
            provenance: Provenance::CUSTOM,
            b: None,
            conditional: false,
        })
    }

    fn two_alpha(alphas: &[f64], coeff: f64, provenance: Provenance, b: f64) -> Self {
        CertificateConstants {
            eta: alphas.iter().map(|a| 2.0 * a).collect(),
            xi: alphas.iter().map(|a| coeff * a * a).collect(),
            provenance,
            b: Some(b),
            conditional: false,
        }
    }

    /// The constants matching the method that produced `trace`.
    ///
    /// `declared_b` is used when present; otherwise the largest recorded
    /// subgradient norm stands in for `B`.
    pub fn for_trace(trace: &RunTrace, declared_b: Option<f64>) -> Result<Self> {
        let observed = observed_b(trace)?;
        let b = declared_b.unwrap_or(observed);
        let conditional = declared_b.is_some_and(|d| observed > d * (1.0 + 1e-12));
        let alphas = &trace.alpha_values;
        let eps = trace.inexactness.eps;
        let mut c = match trace.algo {
            Algorithm::ForwardBackward => Self::forward_backward(alphas, b, eps),
            Algorithm::ProjectedSubgradient => Self::projected_subgradient(alphas, b, eps),
            Algorithm::Incremental => Self::incremental(alphas, trace.m, b),
            Algorithm::DouglasRachford => Self::douglas_rachford(alphas, b),
            Algorithm::SmoothForwardBackward => match trace.schedule {
                StepSchedule::Constant { step } if step > 0.0 => Self::smooth(1.0 / step, trace.len()),
                _ => return Err(Error::contract("smooth trace without a constant step")),
            },
        };
        c.conditional = conditional;
        Ok(c)
    }
}

/// The largest subgradient norm recorded anywhere in the trace.
pub fn observed_b(trace: &RunTrace) -> Result<f64> {
    observed_b_of(trace.l_norms.iter().chain(&trace.r_norms).copied())
}

pub fn observed_b_of(norms: impl IntoIterator<Item = f64>) -> Result<f64> {
    norms
        .into_iter()
        .fold(None, |acc: Option<f64>, n| Some(acc.map_or(n, |a| a.max(n))))
        .ok_or_else(|| Error::contract("no subgradient norms were recorded"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "index")]
pub enum TestPointId {
    Reference,
    Iterate(usize),
    Custom(usize),
}

impl fmt::Display for TestPointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestPointId::Reference => f.write_str("x_ref"),
            TestPointId::Iterate(t) => write!(f, "x_{t}"),
            TestPointId::Custom(i) => write!(f, "custom_{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestPoint {
    pub id: TestPointId,
    pub point: Point,
    pub value: f64,
}

impl TestPoint {
    pub fn reference(point: Point, f_star: f64) -> Self {
        TestPoint {
            id: TestPointId::Reference,
            point,
            value: f_star,
        }
    }
}

/// Every stored iterate of `trace` as a test point.
pub fn iterate_test_points(trace: &RunTrace) -> Vec<TestPoint> {
    trace
        .stored_indices
        .iter()
        .zip(&trace.iterates)
        .map(|(&t, x)| TestPoint {
            id: TestPointId::Iterate(t),
            point: x.clone(),
            value: trace.f_value(t),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlackLocation {
    pub t: usize,
    pub test_point: TestPointId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FejerCertificate {
    pub verdict: Verdict,
    pub min_slack: f64,
    /// `min slack(t, x) / max(1, ‖x_t − x‖²)`; the verdict is taken on this.
    pub min_rel_slack: f64,
    pub argmin: SlackLocation,
    /// `min_t ξ_t − ‖x_{t+1} − x_t‖²` over stored consecutive pairs.
    pub eq3_min_slack: Option<f64>,
    pub constants_provenance: Provenance,
    pub conditional: bool,
    pub tol_rel: f64,
    /// Number of `(t, x)` combinations checked.
    pub checked: usize,
    /// Smallest relative slack at each `t` over all test points checked there;
    /// `None` where no test point could be checked.
    #[serde(skip)]
    pub step_min_rel_slack: Vec<Option<f64>>,
}

/// Worst relative slack found for one test point.
#[derive(Debug, Clone, Copy)]
struct Worst {
    rel: f64,
    abs: f64,
    t: usize,
    checked: usize,
}

fn slack(d_t: f64, d_next: f64, f_t: f64, f_x: f64, eta: f64, xi: f64) -> f64 {
    d_t - eta * (f_t - f_x) + xi - d_next
}

/// Checks the modified Fejér inequality on every pair `(x_t, x_{t+1})` that
/// the trace allows and every test point.
///
/// A test point identical to `trace.reference` is checked at every `t` from
/// the recorded distance column, even when iterates are thinned. Other test
/// points are checked on pairs of consecutive stored iterates.
pub fn certify(
    trace: &RunTrace,
    constants: &CertificateConstants,
    test_points: &[TestPoint],
    tol_rel: f64,
) -> Result<FejerCertificate> {
    let t_count = trace.len();
    if t_count < 2 {
        return Err(Error::contract("certification needs at least two iterates"));
    }
    if trace.f_values.len() != t_count {
        return Err(Error::contract("trace f-values do not cover every iterate"));
    }
    if constants.eta.len() < t_count - 1 || constants.xi.len() < t_count - 1 {
        return Err(Error::contract(format!(
            "constants cover {} steps, trace needs {}",
            constants.eta.len().min(constants.xi.len()),
            t_count - 1
        )));
    }
    if test_points.is_empty() {
        return Err(Error::contract("no test points given"));
    }
    for tp in test_points {
        if !tp.value.is_finite() {
            return Err(Error::domain(format!("f({}) is not finite", tp.id)));
        }
        if tp.point.dim() != trace.last_iterate().dim() {
            return Err(Error::DimensionMismatch {
                expected: trace.last_iterate().dim(),
                got: tp.point.dim(),
            });
        }
    }

    let pairs: Vec<usize> = trace
        .stored_indices
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1] == w[0] + 1)
        .map(|(k, _)| k)
        .collect();

    let per_point: Vec<(Worst, Vec<(usize, f64)>)> = test_points
        .par_iter()
        .map(|tp| check_point(trace, constants, tp, &pairs))
        .collect::<Result<_>>()?;

    let mut step_min: Vec<Option<f64>> = vec![None; t_count - 1];
    let mut best: Option<(Worst, TestPointId)> = None;
    let mut checked = 0;
    let mut min_slack = f64::INFINITY;
    for ((worst, steps), tp) in per_point.iter().zip(test_points) {
        checked += worst.checked;
        min_slack = min_slack.min(worst.abs);
        for &(t, rel) in steps {
            let e = &mut step_min[t - 1];
            *e = Some(e.map_or(rel, |v| v.min(rel)));
        }
        if worst.checked > 0 && best.is_none_or(|(b, _)| worst.rel < b.rel || (worst.rel == b.rel && worst.t < b.t)) {
            best = Some((*worst, tp.id));
        }
    }
    let (worst, id) = best.ok_or_else(|| Error::contract("no (t, x) combination could be checked"))?;

    let eq3_min_slack = pairs
        .iter()
        .map(|&k| {
            let t = trace.stored_indices[k];
            let step = dist_sq(&trace.iterates[k], &trace.iterates[k + 1])?;
            Ok(constants.xi[t - 1] - step)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .reduce(f64::min);

    Ok(FejerCertificate {
        verdict: if worst.rel >= -tol_rel {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        min_slack,
        min_rel_slack: worst.rel,
        argmin: SlackLocation {
            t: worst.t,
            test_point: id,
        },
        eq3_min_slack,
        constants_provenance: constants.provenance,
        conditional: constants.conditional,
        tol_rel,
        checked,
        step_min_rel_slack: step_min,
    })
}

fn check_point(
    trace: &RunTrace,
    c: &CertificateConstants,
    tp: &TestPoint,
    pairs: &[usize],
) -> Result<(Worst, Vec<(usize, f64)>)> {
    let mut worst = Worst {
        rel: f64::INFINITY,
        abs: f64::INFINITY,
        t: 0,
        checked: 0,
    };
    let mut steps = Vec::new();
    let mut visit = |t: usize, d_t: f64, d_next: f64| {
        let s = slack(d_t, d_next, trace.f_value(t), tp.value, c.eta[t - 1], c.xi[t - 1]);
        let rel = s / d_t.max(1.0);
        worst.checked += 1;
        worst.abs = worst.abs.min(s);
        if rel < worst.rel {
            worst.rel = rel;
            worst.t = t;
        }
        steps.push((t, rel));
    };

    let column = match (&trace.dist_sq_to_ref, &trace.reference) {
        (Some(col), Some(r)) if *r == tp.point => Some(col),
        _ => None,
    };
    if let Some(col) = column {
        for t in 1..trace.len() {
            visit(t, col[t - 1], col[t]);
        }
    } else {
        let d: Vec<f64> = trace
            .iterates
            .iter()
            .map(|x| dist_sq(x, &tp.point))
            .collect::<Result<_>>()?;
        for &k in pairs {
            visit(trace.stored_indices[k], d[k], d[k + 1]);
        }
    }
    Ok((worst, steps))
}
