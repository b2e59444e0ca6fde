//! Forward-backward, projected subgradient, incremental and Douglas-Rachford
//! iterations. Every run produces a [`RunTrace`] that the certificate and
//! bound checks consume.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{dist_sq, Point};
use crate::oracles::{checked_subgradient, eps_subgradient_at_shifted_point, ConvexFunction, FunctionOracle};

/// Traces longer than this are thinned geometrically under [`Thinning::Auto`].
pub const FULL_STORAGE_LIMIT: usize = 10_000;

/// Maximum number of radius halvings before falling back to an exact subgradient.
pub const MAX_HALVINGS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "fb")]
    ForwardBackward,
    #[serde(rename = "fb-smooth")]
    SmoothForwardBackward,
    #[serde(rename = "psg")]
    ProjectedSubgradient,
    #[serde(rename = "inc")]
    Incremental,
    #[serde(rename = "dr")]
    DouglasRachford,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::ForwardBackward,
        Algorithm::SmoothForwardBackward,
        Algorithm::ProjectedSubgradient,
        Algorithm::Incremental,
        Algorithm::DouglasRachford,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Algorithm::ForwardBackward => "fb",
            Algorithm::SmoothForwardBackward => "fb-smooth",
            Algorithm::ProjectedSubgradient => "psg",
            Algorithm::Incremental => "inc",
            Algorithm::DouglasRachford => "dr",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.id() == s)
            .ok_or_else(|| Error::config(format!("unknown algorithm '{s}'")))
    }
}

/// Step sizes `α_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepSchedule {
    /// `α_t = alpha · t^(−theta)`.
    Polynomial { alpha: f64, theta: f64 },
    /// `α_t = step` for every `t`.
    Constant { step: f64 },
}

impl StepSchedule {
    pub fn polynomial(alpha: f64, theta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::config(format!("alpha must be positive, got {alpha}")));
        }
        if !(0.0..1.0).contains(&theta) {
            return Err(Error::config(format!("theta must lie in [0, 1), got {theta}")));
        }
        Ok(StepSchedule::Polynomial { alpha, theta })
    }

    pub fn alpha_at(&self, t: usize) -> f64 {
        match *self {
            StepSchedule::Polynomial { alpha, theta } => alpha * (t as f64).powf(-theta),
            StepSchedule::Constant { step } => step,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha_at(1)
    }

    pub fn theta(&self) -> f64 {
        match *self {
            StepSchedule::Polynomial { theta, .. } => theta,
            StepSchedule::Constant { .. } => 0.0,
        }
    }
}

/// `f = Σ_i (l_i + r_i)`: subgradient-side parts `l_i` and prox-side parts `r_i`.
#[derive(Debug, Clone)]
pub struct ObjectiveSpec {
    smooth_parts: Vec<FunctionOracle>,
    prox_parts: Vec<FunctionOracle>,
}

impl ObjectiveSpec {
    pub fn new(smooth_parts: Vec<FunctionOracle>, prox_parts: Vec<FunctionOracle>) -> Result<Self> {
        if smooth_parts.is_empty() || smooth_parts.len() != prox_parts.len() {
            return Err(Error::contract("need m >= 1 components with one l_i and one r_i each"));
        }
        let dim = smooth_parts[0].dim();
        if smooth_parts.iter().chain(&prox_parts).any(|f| f.dim() != dim) {
            return Err(Error::contract("all components must share one dimension"));
        }
        Ok(ObjectiveSpec {
            smooth_parts,
            prox_parts,
        })
    }

    pub fn single(l: FunctionOracle, r: FunctionOracle) -> Result<Self> {
        Self::new(vec![l], vec![r])
    }

    pub fn m(&self) -> usize {
        self.smooth_parts.len()
    }

    pub fn dim(&self) -> usize {
        self.smooth_parts[0].dim()
    }

    pub fn l(&self, i: usize) -> &dyn ConvexFunction {
        self.smooth_parts[i].as_ref()
    }

    pub fn r(&self, i: usize) -> &dyn ConvexFunction {
        self.prox_parts[i].as_ref()
    }

    /// Evaluates `l_1 + r_1 + l_2 + r_2 + …` in that order.
    pub fn value(&self, x: &Point) -> Result<f64> {
        let mut s = 0.0;
        for (l, r) in self.smooth_parts.iter().zip(&self.prox_parts) {
            s += l.value(x)?;
            s += r.value(x)?;
        }
        Ok(s)
    }

    fn single_pair(&self) -> Result<(&dyn ConvexFunction, &dyn ConvexFunction)> {
        if self.m() != 1 {
            return Err(Error::config(format!("this method needs m = 1, got m = {}", self.m())));
        }
        Ok((self.l(0), self.r(0)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Thinning {
    /// Full storage up to [`FULL_STORAGE_LIMIT`] iterates, geometric beyond.
    #[default]
    Auto,
    Full,
    /// Stores `x_1`, `x_T` and the pairs `(x_p, x_{p+1})` for powers of two `p`.
    Geometric,
}

impl FromStr for Thinning {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Thinning::Auto),
            "full" => Ok(Thinning::Full),
            "geometric" => Ok(Thinning::Geometric),
            _ => Err(Error::config(format!("unknown thinning policy '{s}'"))),
        }
    }
}

fn stored_indices(thinning: Thinning, t_count: usize) -> Vec<usize> {
    let geometric = match thinning {
        Thinning::Full => false,
        Thinning::Geometric => true,
        Thinning::Auto => t_count > FULL_STORAGE_LIMIT,
    };
    if !geometric {
        return (1..=t_count).collect();
    }
    let mut set = BTreeSet::new();
    set.insert(1);
    set.insert(t_count);
    let mut p = 1usize;
    while p <= t_count {
        set.insert(p);
        if p < t_count {
            set.insert(p + 1);
        }
        p *= 2;
    }
    set.into_iter().collect()
}

/// Run-level settings shared by every method.
#[derive(Debug, Clone)]
pub struct RunSetup {
    pub problem_id: String,
    pub x1: Point,
    /// Reference minimizer; when present `dist_sq_to_ref` is recorded for every `t`.
    pub reference: Option<Point>,
    pub seed: u64,
    pub thinning: Thinning,
}

impl RunSetup {
    pub fn new(problem_id: impl Into<String>, x1: Point) -> Self {
        RunSetup {
            problem_id: problem_id.into(),
            x1,
            reference: None,
            seed: 0,
            thinning: Thinning::Auto,
        }
    }

    pub fn with_reference(mut self, x_ref: Point) -> Self {
        self.reference = Some(x_ref);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_thinning(mut self, thinning: Thinning) -> Self {
        self.thinning = thinning;
        self
    }
}

/// Inexactness of the forward step.
///
/// With `eps > 0` the subgradient is taken at `x_t + ρ_t u` for a unit direction
/// `u` drawn once per run from the seed, starting from `ρ_t = radius·sqrt(α_t/α_1)`
/// and halving until the certified ε is at most `eps · α_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Inexactness {
    pub eps: f64,
    pub radius: f64,
}

impl Inexactness {
    pub const EXACT: Inexactness = Inexactness { eps: 0.0, radius: 0.0 };

    pub fn new(eps: f64, radius: f64) -> Result<Self> {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::config(format!("eps must be nonnegative, got {eps}")));
        }
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::config(format!(
                "perturbation radius must be nonnegative, got {radius}"
            )));
        }
        Ok(Inexactness { eps, radius })
    }

    fn is_active(&self) -> bool {
        self.eps > 0.0 && self.radius > 0.0
    }
}

/// Stored `y_t` and `z_t` of a Douglas-Rachford run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitIterate {
    pub t: usize,
    pub y: Point,
    pub z: Point,
}

/// Per-iteration record of a run. Row `t` (1-based) describes `x_t` and the
/// step leaving it; the last row has no outgoing step, so its `eps` is zero and
/// its norms come from the canonical subgradients at `x_T` alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub algo: Algorithm,
    pub problem_id: String,
    pub seed: u64,
    #[serde(rename = "T")]
    pub t_count: usize,
    pub m: usize,
    pub schedule: StepSchedule,
    pub inexactness: Inexactness,
    pub reference: Option<Point>,
    pub stored_indices: Vec<usize>,
    pub iterates: Vec<Point>,
    pub f_values: Vec<f64>,
    pub alpha_values: Vec<f64>,
    pub eps_values: Vec<f64>,
    /// Largest norm among the l-side subgradients queried for row `t`.
    pub l_norms: Vec<f64>,
    /// Largest norm among the r-side subgradients (including prox residuals) for row `t`.
    pub r_norms: Vec<f64>,
    pub dist_sq_to_ref: Option<Vec<f64>>,
    /// Douglas-Rachford only: `y_t, z_t` at stored `t ≥ 2`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub split_iterates: Vec<SplitIterate>,
    /// Douglas-Rachford only: `f(z_t)` for `t = 2..=T`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub f_at_z: Vec<f64>,
}

impl RunTrace {
    pub fn len(&self) -> usize {
        self.t_count
    }

    pub fn is_empty(&self) -> bool {
        self.t_count == 0
    }

    /// The stored iterate `x_t`, if kept by the thinning policy.
    pub fn iterate(&self, t: usize) -> Option<&Point> {
        self.stored_indices.binary_search(&t).ok().map(|k| &self.iterates[k])
    }

    pub fn last_iterate(&self) -> &Point {
        self.iterates.last().expect("a trace stores x_T")
    }

    pub fn f_value(&self, t: usize) -> f64 {
        self.f_values[t - 1]
    }

    /// Running maximum of all recorded subgradient norms.
    pub fn max_norm_so_far(&self) -> Vec<f64> {
        let mut running = 0.0f64;
        self.l_norms
            .iter()
            .zip(&self.r_norms)
            .map(|(&l, &r)| {
                running = running.max(l).max(r);
                running
            })
            .collect()
    }

    pub fn is_fully_stored(&self) -> bool {
        self.stored_indices.len() == self.t_count
    }
}

struct Recorder {
    trace: RunTrace,
    next_stored: usize,
}

impl Recorder {
    fn new(
        algo: Algorithm,
        setup: &RunSetup,
        t_count: usize,
        m: usize,
        schedule: StepSchedule,
        inexactness: Inexactness,
    ) -> Result<Self> {
        if t_count == 0 {
            return Err(Error::config("T must be at least 1"));
        }
        if let Some(r) = &setup.reference {
            crate::numerics::check_dims(&setup.x1, r)?;
        }
        let stored = stored_indices(setup.thinning, t_count);
        Ok(Recorder {
            trace: RunTrace {
                algo,
                problem_id: setup.problem_id.clone(),
                seed: setup.seed,
                t_count,
                m,
                schedule,
                inexactness,
                reference: setup.reference.clone(),
                iterates: Vec::with_capacity(stored.len()),
                stored_indices: stored,
                f_values: Vec::with_capacity(t_count),
                alpha_values: Vec::with_capacity(t_count),
                eps_values: Vec::with_capacity(t_count),
                l_norms: Vec::with_capacity(t_count),
                r_norms: Vec::with_capacity(t_count),
                dist_sq_to_ref: setup.reference.as_ref().map(|_| Vec::with_capacity(t_count)),
                split_iterates: Vec::new(),
                f_at_z: Vec::new(),
            },
            next_stored: 0,
        })
    }

    fn wants(&self, t: usize) -> bool {
        self.trace.stored_indices.get(self.next_stored) == Some(&t)
    }

    #[allow(clippy::too_many_arguments)]
    fn push(&mut self, t: usize, x: &Point, f: f64, alpha: f64, eps: f64, l_norm: f64, r_norm: f64) -> Result<()> {
        if !f.is_finite() {
            return Err(Error::domain(format!("f(x_{t}) is not finite")));
        }
        let tr = &mut self.trace;
        tr.f_values.push(f);
        tr.alpha_values.push(alpha);
        tr.eps_values.push(eps);
        tr.l_norms.push(l_norm);
        tr.r_norms.push(r_norm);
        if let (Some(d), Some(r)) = (tr.dist_sq_to_ref.as_mut(), tr.reference.as_ref()) {
            d.push(dist_sq(x, r)?);
        }
        if self.wants(t) {
            self.trace.iterates.push(x.clone());
            self.next_stored += 1;
        }
        Ok(())
    }

    fn finish(self) -> RunTrace {
        self.trace
    }
}

fn unit_direction(dim: usize, seed: u64) -> Point {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let n = crate::numerics::dot(&v, &v).sqrt();
        if n > 1e-12 {
            return Point::from_computed(v.iter().map(|c| c / n).collect()).expect("finite direction");
        }
    }
}

/// Result of one forward-backward step.
#[derive(Debug, Clone, PartialEq)]
pub struct FbStep {
    pub next: Point,
    /// Certified ε of the subgradient used.
    pub eps: f64,
    pub g_norm: f64,
    /// Norm of the prox residual `(x − α g − x_next)/α ∈ ∂r(x_next)`.
    pub q_norm: f64,
}

/// `x_next = prox_{α r}(x − α g)` with the residual norm recorded.
fn prox_grad_from(r: &dyn ConvexFunction, alpha: f64, x: &Point, g: &Point) -> Result<(Point, f64)> {
    let forward = x.axpy(-alpha, g)?;
    let next = r.prox(alpha, &forward)?;
    let q_norm = forward.sub(&next)?.norm() / alpha;
    Ok((next, q_norm))
}

/// One step `x_{t+1} = prox_{α r}(x − α g)` with `g ∈ ∂_ε l(x)`, `ε ≤ eps_budget`.
///
/// `shift` is the initial perturbation; it is halved until the certified ε
/// fits the budget, with the exact subgradient as the fallback. A zero budget
/// or no shift uses the exact subgradient directly.
pub fn forward_backward_step(
    x: &Point,
    alpha: f64,
    l: &dyn ConvexFunction,
    r: &dyn ConvexFunction,
    eps_budget: f64,
    shift: Option<&Point>,
) -> Result<FbStep> {
    if !(eps_budget >= 0.0) {
        return Err(Error::contract("eps budget must be nonnegative"));
    }
    if !r.has_prox() {
        return Err(Error::config(format!("{} has no proximity operator", r.name())));
    }
    let (g, eps) = match shift {
        Some(s) if eps_budget > 0.0 => perturbed_subgradient(l, x, s, eps_budget)?,
        _ => (checked_subgradient(l, x)?, 0.0),
    };
    let (next, q_norm) = prox_grad_from(r, alpha, x, &g)?;
    Ok(FbStep {
        next,
        eps,
        g_norm: g.norm(),
        q_norm,
    })
}

fn perturbed_subgradient(l: &dyn ConvexFunction, x: &Point, shift: &Point, budget: f64) -> Result<(Point, f64)> {
    let mut s = shift.clone();
    for _ in 0..=MAX_HALVINGS {
        let y = x.add(&s)?;
        let e = eps_subgradient_at_shifted_point(l, x, &y)?;
        if e.eps <= budget {
            return Ok((e.g, e.eps));
        }
        s = s.scale(0.5);
    }
    Ok((checked_subgradient(l, x)?, 0.0))
}

fn canonical_norm(f: &dyn ConvexFunction, x: &Point) -> Result<f64> {
    Ok(checked_subgradient(f, x)?.norm())
}

/// Forward-backward splitting with `α_t` from `schedule` and ε-subgradients of `l`.
pub fn run_forward_backward(
    spec: &ObjectiveSpec,
    setup: &RunSetup,
    schedule: StepSchedule,
    inexact: Inexactness,
    t_count: usize,
) -> Result<RunTrace> {
    run_fb_like(Algorithm::ForwardBackward, spec, setup, schedule, inexact, t_count)
}

fn run_fb_like(
    algo: Algorithm,
    spec: &ObjectiveSpec,
    setup: &RunSetup,
    schedule: StepSchedule,
    inexact: Inexactness,
    t_count: usize,
) -> Result<RunTrace> {
    let (l, r) = spec.single_pair()?;
    if !r.has_prox() {
        return Err(Error::config(format!("{} has no proximity operator", r.name())));
    }
    crate::numerics::check_dims(&setup.x1, &Point::zeros(spec.dim()))?;
    let mut rec = Recorder::new(algo, setup, t_count, 1, schedule, inexact)?;
    let direction = inexact.is_active().then(|| unit_direction(spec.dim(), setup.seed));
    let alpha1 = schedule.alpha_at(1);
    let feasibility = algo == Algorithm::ProjectedSubgradient;

    let mut x = setup.x1.clone();
    for t in 1..=t_count {
        let fx = spec.value(&x)?;
        if feasibility && !r.value(&x)?.is_finite() {
            return Err(Error::contract(format!("x_{t} left the feasible set")));
        }
        let alpha = schedule.alpha_at(t);
        let l_canon = canonical_norm(l, &x)?;
        let r_canon = canonical_norm(r, &x)?;
        if t == t_count {
            rec.push(t, &x, fx, alpha, 0.0, l_canon, r_canon)?;
            break;
        }
        let shift = direction
            .as_ref()
            .map(|u| u.scale(inexact.radius * (alpha / alpha1).sqrt()));
        let step = forward_backward_step(&x, alpha, l, r, inexact.eps * alpha, shift.as_ref())?;
        rec.push(
            t,
            &x,
            fx,
            alpha,
            step.eps,
            l_canon.max(step.g_norm),
            r_canon.max(step.q_norm),
        )?;
        x = step.next;
    }
    Ok(rec.finish())
}

/// Constant step `1/β` forward-backward with exact gradients of a `β`-smooth `l`.
pub fn run_smooth_fb(spec: &ObjectiveSpec, setup: &RunSetup, t_count: usize) -> Result<RunTrace> {
    let (l, _) = spec.single_pair()?;
    let beta = l
        .smoothness_bound()
        .ok_or_else(|| Error::config(format!("{} declares no gradient Lipschitz constant", l.name())))?;
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::config(format!("smooth step needs beta > 0, got {beta}")));
    }
    let schedule = StepSchedule::Constant { step: 1.0 / beta };
    run_fb_like(
        Algorithm::SmoothForwardBackward,
        spec,
        setup,
        schedule,
        Inexactness::EXACT,
        t_count,
    )
}

/// `x_{t+1} = P_D(x_t − α_t g_t)` where `r` is the indicator of `D`.
pub fn run_projected_subgradient(
    spec: &ObjectiveSpec,
    setup: &RunSetup,
    schedule: StepSchedule,
    inexact: Inexactness,
    t_count: usize,
) -> Result<RunTrace> {
    let (_, r) = spec.single_pair()?;
    if r.is_real_valued() || !r.has_prox() {
        return Err(Error::config(format!(
            "projected subgradient needs r to be the indicator of a projectable set, got {}",
            r.name()
        )));
    }
    if !r.value(&setup.x1)?.is_finite() {
        return Err(Error::config("x_1 must lie in the feasible set"));
    }
    run_fb_like(Algorithm::ProjectedSubgradient, spec, setup, schedule, inexact, t_count)
}

/// Smallest index attaining `min_t f(x_t)`, 1-based.
pub fn best_iterate(trace: &RunTrace) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (k, &f) in trace.f_values.iter().enumerate() {
        if best.is_none_or(|(_, v)| f < v) {
            best = Some((k + 1, f));
        }
    }
    best.ok_or_else(|| Error::contract("empty trace"))
}

/// Outcome of one incremental cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleStep {
    pub next: Point,
    pub l_norm: f64,
    pub r_norm: f64,
}

/// One cycle `ψ^i = prox_{α r_i}(ψ^{i−1} − α g^i)`, `g^i ∈ ∂l_i(ψ^{i−1})`, `i = 1..m`.
pub fn incremental_cycle(x: &Point, alpha: f64, spec: &ObjectiveSpec) -> Result<CycleStep> {
    let mut psi = x.clone();
    let (mut l_norm, mut r_norm) = (0.0f64, 0.0f64);
    for i in 0..spec.m() {
        let (l, r) = (spec.l(i), spec.r(i));
        if !r.has_prox() {
            return Err(Error::config(format!(
                "r_{} ({}) has no proximity operator",
                i + 1,
                r.name()
            )));
        }
        let g = checked_subgradient(l, &psi)?;
        let (next, q_norm) = prox_grad_from(r, alpha, &psi, &g)?;
        l_norm = l_norm.max(g.norm());
        r_norm = r_norm.max(q_norm);
        psi = next;
    }
    Ok(CycleStep {
        next: psi,
        l_norm,
        r_norm,
    })
}

/// Cyclic incremental subgradient-proximal method.
pub fn run_incremental(
    spec: &ObjectiveSpec,
    setup: &RunSetup,
    schedule: StepSchedule,
    t_count: usize,
) -> Result<RunTrace> {
    crate::numerics::check_dims(&setup.x1, &Point::zeros(spec.dim()))?;
    let mut rec = Recorder::new(
        Algorithm::Incremental,
        setup,
        t_count,
        spec.m(),
        schedule,
        Inexactness::EXACT,
    )?;
    let mut x = setup.x1.clone();
    for t in 1..=t_count {
        let fx = spec.value(&x)?;
        let alpha = schedule.alpha_at(t);
        let (mut l_canon, mut r_canon) = (0.0f64, 0.0f64);
        for i in 0..spec.m() {
            l_canon = l_canon.max(canonical_norm(spec.l(i), &x)?);
            r_canon = r_canon.max(canonical_norm(spec.r(i), &x)?);
        }
        if t == t_count {
            rec.push(t, &x, fx, alpha, 0.0, l_canon, r_canon)?;
            break;
        }
        let cycle = incremental_cycle(&x, alpha, spec)?;
        rec.push(
            t,
            &x,
            fx,
            alpha,
            0.0,
            l_canon.max(cycle.l_norm),
            r_canon.max(cycle.r_norm),
        )?;
        x = cycle.next;
    }
    Ok(rec.finish())
}

/// One Douglas-Rachford update.
#[derive(Debug, Clone, PartialEq)]
pub struct DrStep {
    pub x_next: Point,
    pub y: Point,
    pub z: Point,
    /// `v = (x − y)/α ∈ ∂l(y)`.
    pub v: Point,
    /// `w = (2y − x − z)/α ∈ ∂r(z)`.
    pub w: Point,
}

/// `y = prox_{α l}(x)`, `z = prox_{α r}(2y − x)`, `x_next = x + (z − y)`.
pub fn douglas_rachford_step(x: &Point, alpha: f64, l: &dyn ConvexFunction, r: &dyn ConvexFunction) -> Result<DrStep> {
    for f in [l, r] {
        if !f.has_prox() {
            return Err(Error::config(format!("{} has no proximity operator", f.name())));
        }
    }
    let y = l.prox(alpha, x)?;
    let reflected = y.scale(2.0).sub(x)?;
    let z = r.prox(alpha, &reflected)?;
    let x_next = x.add(&z.sub(&y)?)?;
    let v = x.sub(&y)?.scale(1.0 / alpha);
    let w = reflected.sub(&z)?.scale(1.0 / alpha);
    Ok(DrStep { x_next, y, z, v, w })
}

/// Douglas-Rachford splitting; `f` is recorded at the governing sequence `x_t`.
pub fn run_douglas_rachford(
    spec: &ObjectiveSpec,
    setup: &RunSetup,
    schedule: StepSchedule,
    t_count: usize,
) -> Result<RunTrace> {
    let (l, r) = spec.single_pair()?;
    for f in [l, r] {
        if !f.has_prox() {
            return Err(Error::config(format!("{} has no proximity operator", f.name())));
        }
    }
    crate::numerics::check_dims(&setup.x1, &Point::zeros(spec.dim()))?;
    let mut rec = Recorder::new(
        Algorithm::DouglasRachford,
        setup,
        t_count,
        1,
        schedule,
        Inexactness::EXACT,
    )?;
    let mut x = setup.x1.clone();
    // norms of v_t, w_t produced by the step that created x_t
    let mut carried = (0.0f64, 0.0f64);
    for t in 1..=t_count {
        let fx = spec.value(&x)?;
        let alpha = schedule.alpha_at(t);
        let l_canon = canonical_norm(l, &x)?;
        let r_canon = canonical_norm(r, &x)?;
        let (l_in, r_in) = (l_canon.max(carried.0), r_canon.max(carried.1));
        if t == t_count {
            rec.push(t, &x, fx, alpha, 0.0, l_in, r_in)?;
            break;
        }
        let step = douglas_rachford_step(&x, alpha, l, r)?;
        let (v_norm, w_norm) = (step.v.norm(), step.w.norm());
        rec.push(t, &x, fx, alpha, 0.0, l_in.max(v_norm), r_in.max(w_norm))?;
        rec.trace.f_at_z.push(spec.value(&step.z)?);
        if rec.wants(t + 1) {
            rec.trace.split_iterates.push(SplitIterate {
                t: t + 1,
                y: step.y,
                z: step.z,
            });
        }
        carried = (v_norm, w_norm);
        x = step.x_next;
    }
    Ok(rec.finish())
}
