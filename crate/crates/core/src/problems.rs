//! A small catalog of test problems with reference minimizers computed on load.
//!
//! Random data is drawn from fixed per-problem seeds. Every problem carries a
//! reference point `x_ref` and value `f_star` produced by a solver that shares
//! no code path with the methods under test beyond the oracles, and each is
//! checked for optimality before it is handed out.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::algorithms::{douglas_rachford_step, Algorithm, ObjectiveSpec};
use crate::error::{Error, Result};
use crate::numerics::{dist_sq, inner, norm_sq, Point};
use crate::oracles::{
    BallIndicator, BoxIndicator, ConvexFunction, FunctionOracle, HingeSum, L1Norm, Linear, Quadratic, SquaredNorm, Zero,
};

pub const PROBLEM_IDS: [&str; 11] = [
    "lasso_small",
    "lasso_zero",
    "box_l1",
    "ball_linear",
    "hinge_sum_m1",
    "hinge_sum_m3",
    "hinge_sum_m10",
    "quad_abs_1d",
    "abs_box_1d",
    "two_quads_1d",
    "quad_halfline_1d",
];

/// Number of random probes used by the optimality check.
pub const OPTIMALITY_PROBES: usize = 1000;
pub const OPTIMALITY_TOL: f64 = 1e-8;

const REFERENCE_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Capabilities {
    /// Every `l_i` has a proximity operator.
    pub prox_l: bool,
    /// Every `r_i` has a proximity operator.
    pub prox_r: bool,
    /// `m = 1` and `r` is the indicator of a bounded set with a projection.
    pub projectable_d: bool,
    /// Every `l_i` and `r_i` is finite everywhere.
    pub real_valued: bool,
    pub separable_m: usize,
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub id: String,
    pub summary: String,
    pub spec: ObjectiveSpec,
    pub x1: Point,
    pub x_ref: Point,
    pub f_star: f64,
    /// Uniform bound on every subgradient the methods can query, when known.
    pub b_analytic: Option<f64>,
    /// Lipschitz constant of `∇l` for the smooth method.
    pub beta_analytic: Option<f64>,
    pub capabilities: Capabilities,
    pub algorithms: Vec<Algorithm>,
    pub seed: u64,
    pub params: BTreeMap<String, f64>,
}

/// The JSON form of a problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemDescriptor {
    pub id: String,
    pub summary: String,
    pub dim: usize,
    pub m: usize,
    pub seed: u64,
    pub params: BTreeMap<String, f64>,
    pub algorithms: Vec<Algorithm>,
    pub capabilities: Capabilities,
    pub b_analytic: Option<f64>,
    pub beta_analytic: Option<f64>,
    pub x1: Point,
    pub x_ref: Point,
    pub f_star: f64,
}

impl Problem {
    pub fn descriptor(&self) -> ProblemDescriptor {
        ProblemDescriptor {
            id: self.id.clone(),
            summary: self.summary.clone(),
            dim: self.spec.dim(),
            m: self.spec.m(),
            seed: self.seed,
            params: self.params.clone(),
            algorithms: self.algorithms.clone(),
            capabilities: self.capabilities,
            b_analytic: self.b_analytic,
            beta_analytic: self.beta_analytic,
            x1: self.x1.clone(),
            x_ref: self.x_ref.clone(),
            f_star: self.f_star,
        }
    }

    /// `‖x_1 − x_ref‖²`.
    pub fn d_sq(&self) -> f64 {
        dist_sq(&self.x1, &self.x_ref).expect("catalog dimensions agree")
    }

    /// Checks that `algo` is declared for this problem and that its
    /// preconditions hold.
    pub fn check_algorithm(&self, algo: Algorithm) -> Result<()> {
        if !self.algorithms.contains(&algo) {
            return Err(Error::config(format!(
                "algorithm {algo} is not declared for problem {}",
                self.id
            )));
        }
        capability_check(&self.capabilities, self.beta_analytic, algo)
            .map_err(|why| Error::config(format!("{algo} cannot run on {}: {why}", self.id)))
    }
}

fn capability_check(c: &Capabilities, beta: Option<f64>, algo: Algorithm) -> std::result::Result<(), &'static str> {
    let single = c.separable_m == 1;
    match algo {
        Algorithm::ForwardBackward if !(single && c.prox_r) => Err("needs m = 1 and a prox for r"),
        Algorithm::SmoothForwardBackward if !(single && c.prox_r && beta.is_some_and(|b| b > 0.0)) => {
            Err("needs m = 1, a prox for r and a gradient Lipschitz constant")
        }
        Algorithm::ProjectedSubgradient if !c.projectable_d => Err("needs r to be the indicator of a bounded set"),
        Algorithm::Incremental if !c.prox_r => Err("needs a prox for every r_i"),
        Algorithm::DouglasRachford if !(single && c.prox_l && c.prox_r && c.real_valued) => {
            Err("needs m = 1 and real-valued l and r with proxes")
        }
        _ => Ok(()),
    }
}

fn capabilities(spec: &ObjectiveSpec, bounded_set: bool) -> Capabilities {
    let m = spec.m();
    let ls = || (0..m).map(|i| spec.l(i));
    let rs = || (0..m).map(|i| spec.r(i));
    Capabilities {
        prox_l: ls().all(|f| f.has_prox()),
        prox_r: rs().all(|f| f.has_prox()),
        projectable_d: bounded_set && m == 1 && !spec.r(0).is_real_valued() && spec.r(0).has_prox(),
        real_valued: ls().chain(rs()).all(|f| f.is_real_valued()),
        separable_m: m,
    }
}

/// Builds every problem in the catalog.
pub fn catalog() -> Result<Vec<Problem>> {
    PROBLEM_IDS.iter().map(|id| problem(id)).collect()
}

/// Builds one problem by id, including its reference solution.
pub fn problem(id: &str) -> Result<Problem> {
    let draft = match id {
        "lasso_small" => lasso("lasso_small", 20, 60, 0.1, 0x1a550),
        "lasso_zero" => lasso("lasso_zero", 10, 15, 1.5, 0x1a551),
        "box_l1" => box_l1(),
        "ball_linear" => ball_linear(),
        "hinge_sum_m1" => hinge_sum("hinge_sum_m1", 1),
        "hinge_sum_m3" => hinge_sum("hinge_sum_m3", 3),
        "hinge_sum_m10" => hinge_sum("hinge_sum_m10", 10),
        "quad_abs_1d" => quad_abs_1d(),
        "abs_box_1d" => abs_box_1d(),
        "two_quads_1d" => two_quads_1d(),
        "quad_halfline_1d" => quad_halfline_1d(),
        _ => return Err(Error::config(format!("unknown problem '{id}'"))),
    }?;
    draft.finish()
}

/// A problem before its reference solution is attached.
struct Draft {
    id: &'static str,
    summary: String,
    spec: ObjectiveSpec,
    x1: Point,
    bounded_set: bool,
    b_analytic: Option<f64>,
    algorithms: Vec<Algorithm>,
    seed: u64,
    params: BTreeMap<String, f64>,
    solver: Solver,
}

enum Solver {
    Generic,
    HingeDual {
        rows: Vec<Point>,
        labels: Vec<f64>,
        mu: f64,
    },
}

impl Draft {
    fn finish(self) -> Result<Problem> {
        let (x_ref, f_star) = match &self.solver {
            Solver::Generic => reference_solve(&self.spec, REFERENCE_BUDGET)?,
            Solver::HingeDual { rows, labels, mu } => {
                let x = hinge_dual_solve(rows, labels, *mu, REFERENCE_BUDGET)?;
                let f = self.spec.value(&x)?;
                (x, f)
            }
        };
        if self.spec.dim() == 1 {
            let (_, f_grid) = golden_section_1d(&self.spec)?;
            if (f_grid - f_star).abs() > 1e-10 * (1.0 + f_star.abs()) {
                return Err(Error::Validity(format!(
                    "{}: reference value {f_star} disagrees with grid search {f_grid}",
                    self.id
                )));
            }
        }
        let worst = optimality_slack(&self.spec, &x_ref, f_star, OPTIMALITY_PROBES, self.seed ^ 0x9e37)?;
        if worst < -OPTIMALITY_TOL {
            return Err(Error::Validity(format!(
                "{}: reference point fails the optimality probe (slack {worst:e})",
                self.id
            )));
        }
        let capabilities = capabilities(&self.spec, self.bounded_set);
        let beta_analytic = (self.spec.m() == 1)
            .then(|| self.spec.l(0).smoothness_bound())
            .flatten()
            .filter(|&b| b > 0.0);
        let problem = Problem {
            id: self.id.to_string(),
            summary: self.summary,
            spec: self.spec,
            x1: self.x1,
            x_ref,
            f_star,
            b_analytic: self.b_analytic,
            beta_analytic,
            capabilities,
            algorithms: self.algorithms,
            seed: self.seed,
            params: self.params,
        };
        for &a in &problem.algorithms {
            capability_check(&problem.capabilities, problem.beta_analytic, a)
                .map_err(|why| Error::Validity(format!("{} declares {a} but {why}", problem.id)))?;
        }
        Ok(problem)
    }
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

fn gaussian_matrix(rows: usize, cols: usize, scale: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let data: Vec<f64> = (0..rows * cols)
        .map(|_| scale * Distribution::<f64>::sample(&StandardNormal, rng))
        .collect();
    DMatrix::from_row_slice(rows, cols, &data)
}

/// `½‖Ax − b‖² + λ‖x‖₁` with `λ = ratio · ‖Aᵀb‖_∞`.
fn lasso(id: &'static str, n: usize, rows: usize, ratio: f64, seed: u64) -> Result<Draft> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = gaussian_matrix(rows, n, 1.0 / (rows as f64).sqrt(), &mut rng);
    let mut x_true = DVector::zeros(n);
    for i in 0..n.div_ceil(4) {
        x_true[i] = if i % 2 == 0 { 1.0 } else { -1.0 } * (1.0 + i as f64 / n as f64);
    }
    let noise = DVector::from_fn(rows, |_, _| {
        0.1 * Distribution::<f64>::sample(&StandardNormal, &mut rng)
    });
    let b = &a * x_true + noise;
    let lambda = ratio * (a.transpose() * &b).amax();
    let l = Quadratic::new(a, b)?;
    let spec = ObjectiveSpec::single(Arc::new(l), Arc::new(L1Norm::new(lambda, n)))?;
    let x1 = if ratio >= 1.0 {
        Point::new(vec![0.5; n])?
    } else {
        Point::zeros(n)
    };
    Ok(Draft {
        id,
        summary: format!("½‖Ax − b‖² + λ‖x‖₁, A is {rows}×{n} Gaussian, λ = {ratio}·‖Aᵀb‖_∞"),
        spec,
        x1,
        bounded_set: false,
        b_analytic: None,
        algorithms: vec![
            Algorithm::ForwardBackward,
            Algorithm::SmoothForwardBackward,
            Algorithm::Incremental,
            Algorithm::DouglasRachford,
        ],
        seed,
        params: params(&[
            ("n", n as f64),
            ("rows", rows as f64),
            ("lambda", lambda),
            ("lambda_ratio", ratio),
        ]),
        solver: Solver::Generic,
    })
}

/// `‖x − a‖₁ + ι_{[−1,1]^n}` with `a` uniform in the cube.
fn box_l1() -> Result<Draft> {
    let (n, seed) = (10, 0xb0c1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = Point::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect())?;
    let spec = ObjectiveSpec::single(Arc::new(L1Norm::centered(1.0, a)), Arc::new(BoxIndicator::cube(n, 1.0)))?;
    Ok(Draft {
        id: "box_l1",
        summary: format!("‖x − a‖₁ over [−1, 1]^{n}"),
        spec,
        x1: Point::zeros(n),
        bounded_set: true,
        b_analytic: Some((n as f64).sqrt()),
        algorithms: vec![
            Algorithm::ProjectedSubgradient,
            Algorithm::ForwardBackward,
            Algorithm::Incremental,
        ],
        seed,
        params: params(&[("n", n as f64)]),
        solver: Solver::Generic,
    })
}

/// `⟨c, x⟩` over the unit ball.
fn ball_linear() -> Result<Draft> {
    let (n, seed) = (3, 0xba11);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = Point::new((0..n).map(|_| StandardNormal.sample(&mut rng)).collect())?;
    let b = c.norm();
    let ball = BallIndicator {
        center: Point::zeros(n),
        radius: 1.0,
    };
    let spec = ObjectiveSpec::single(Arc::new(Linear { c }), Arc::new(ball))?;
    Ok(Draft {
        id: "ball_linear",
        summary: format!("⟨c, x⟩ over the unit ball in dimension {n}"),
        spec,
        x1: Point::zeros(n),
        bounded_set: true,
        b_analytic: Some(b),
        algorithms: vec![Algorithm::ProjectedSubgradient, Algorithm::ForwardBackward],
        seed,
        params: params(&[("n", n as f64), ("radius", 1.0)]),
        solver: Solver::Generic,
    })
}

/// `Σ_j max(0, 1 − b_j⟨a_j, x⟩) + (μ/2)‖x‖²`, split into `m` blocks of rows,
/// each block carrying `(μ/2m)‖x‖²`.
fn hinge_sum(id: &'static str, m: usize) -> Result<Draft> {
    let (n, points, mu, seed) = (5, 30, 1.0, 0x41e6e);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut rows = Vec::with_capacity(points);
    let mut labels = Vec::with_capacity(points);
    for _ in 0..points {
        let a: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let noise: f64 = StandardNormal.sample(&mut rng);
        let score = crate::numerics::dot(&a, &w) + noise;
        labels.push(if score >= 0.0 { 1.0 } else { -1.0 });
        rows.push(Point::new(a)?);
    }
    let block = points / m;
    let mut ls: Vec<FunctionOracle> = Vec::with_capacity(m);
    let mut rs: Vec<FunctionOracle> = Vec::with_capacity(m);
    for i in 0..m {
        let range = i * block..if i + 1 == m { points } else { (i + 1) * block };
        ls.push(Arc::new(HingeSum::new(
            rows[range.clone()].to_vec(),
            labels[range].to_vec(),
        )?));
        rs.push(Arc::new(SquaredNorm {
            weight: mu / m as f64,
            dim: n,
        }));
    }
    let mut algorithms = vec![Algorithm::Incremental];
    if m == 1 {
        algorithms.push(Algorithm::ForwardBackward);
    }
    Ok(Draft {
        id,
        summary: format!(
            "{points} hinge terms in dimension {n} plus (μ/2)‖x‖², split into {m} block{}",
            if m == 1 { "" } else { "s" }
        ),
        spec: ObjectiveSpec::new(ls, rs)?,
        x1: Point::zeros(n),
        bounded_set: false,
        b_analytic: None,
        algorithms,
        seed,
        params: params(&[("n", n as f64), ("points", points as f64), ("mu", mu), ("m", m as f64)]),
        solver: Solver::HingeDual { rows, labels, mu },
    })
}

fn quad_1d(center: f64) -> Result<Quadratic> {
    Quadratic::new(DMatrix::identity(1, 1), DVector::from_vec(vec![center]))
}

fn one_dim(
    id: &'static str,
    summary: &str,
    spec: ObjectiveSpec,
    x1: f64,
    bounded_set: bool,
    algorithms: Vec<Algorithm>,
) -> Result<Draft> {
    let b_analytic = bounded_b(&spec);
    Ok(Draft {
        id,
        summary: summary.to_string(),
        spec,
        x1: Point::new(vec![x1])?,
        bounded_set,
        b_analytic,
        algorithms,
        seed: 0,
        params: BTreeMap::new(),
        solver: Solver::Generic,
    })
}

/// A uniform subgradient bound when every part declares one.
fn bounded_b(spec: &ObjectiveSpec) -> Option<f64> {
    let mut b = 0.0f64;
    for i in 0..spec.m() {
        b = b.max(spec.l(i).lipschitz_bound()?).max(spec.r(i).lipschitz_bound()?);
    }
    Some(b)
}

fn quad_abs_1d() -> Result<Draft> {
    let spec = ObjectiveSpec::single(Arc::new(quad_1d(2.0)?), Arc::new(L1Norm::new(1.0, 1)))?;
    one_dim(
        "quad_abs_1d",
        "½(x − 2)² + |x|",
        spec,
        0.0,
        false,
        vec![
            Algorithm::ForwardBackward,
            Algorithm::SmoothForwardBackward,
            Algorithm::Incremental,
            Algorithm::DouglasRachford,
        ],
    )
}

fn abs_box_1d() -> Result<Draft> {
    let spec = ObjectiveSpec::single(Arc::new(L1Norm::new(1.0, 1)), Arc::new(BoxIndicator::cube(1, 1.0)))?;
    let mut d = one_dim(
        "abs_box_1d",
        "|x| on [−1, 1]",
        spec,
        0.5,
        true,
        vec![Algorithm::ProjectedSubgradient, Algorithm::ForwardBackward],
    )?;
    d.b_analytic = Some(1.0);
    Ok(d)
}

fn two_quads_1d() -> Result<Draft> {
    let zero = || -> FunctionOracle { Arc::new(Zero { dim: 1 }) };
    let spec = ObjectiveSpec::new(
        vec![Arc::new(quad_1d(1.0)?), Arc::new(quad_1d(-1.0)?)],
        vec![zero(), zero()],
    )?;
    one_dim(
        "two_quads_1d",
        "½(x − 1)² + ½(x + 1)², two blocks",
        spec,
        3.0,
        false,
        vec![Algorithm::Incremental],
    )
}

fn quad_halfline_1d() -> Result<Draft> {
    let half = BoxIndicator::new(vec![f64::NEG_INFINITY], vec![0.0])?;
    let spec = ObjectiveSpec::single(Arc::new(quad_1d(2.0)?), Arc::new(half))?;
    one_dim(
        "quad_halfline_1d",
        "½(x − 2)² on x ≤ 0",
        spec,
        -1.0,
        false,
        vec![Algorithm::ForwardBackward, Algorithm::SmoothForwardBackward],
    )
}

/// High-accuracy minimizer of `spec` and its value.
///
/// Uses constant-step proximal gradient when `l` is smooth, constant-step
/// Douglas-Rachford when both parts have proxes, and gradient descent on the
/// whole sum when every part is smooth. Other objectives are rejected.
pub fn reference_solve(spec: &ObjectiveSpec, budget: usize) -> Result<(Point, f64)> {
    let x0 = Point::zeros(spec.dim());
    let x = if spec.m() == 1 {
        let (l, r) = (spec.l(0), spec.r(0));
        match l.smoothness_bound() {
            Some(beta) if beta > 0.0 && r.has_prox() => fixed_point(x0, budget, |x| {
                let g = l.subgradient(x)?;
                r.prox(1.0 / beta, &x.axpy(-1.0 / beta, &g)?)
            })?,
            _ if l.has_prox() && r.has_prox() => {
                let gov = fixed_point(x0, budget, |x| Ok(douglas_rachford_step(x, 1.0, l, r)?.x_next))?;
                douglas_rachford_step(&gov, 1.0, l, r)?.z
            }
            _ => return Err(Error::config("no reference solver applies to this objective")),
        }
    } else {
        let parts: Vec<&dyn ConvexFunction> = (0..spec.m()).flat_map(|i| [spec.l(i), spec.r(i)]).collect();
        let mut beta = 0.0;
        for f in &parts {
            beta += f
                .smoothness_bound()
                .ok_or_else(|| Error::config("no reference solver applies to this objective"))?;
        }
        if !(beta > 0.0) {
            return Err(Error::config("objective is constant"));
        }
        fixed_point(x0, budget, |x| {
            let mut g = Point::zeros(x.dim());
            for f in &parts {
                g = g.add(&f.subgradient(x)?)?;
            }
            x.axpy(-1.0 / beta, &g)
        })?
    };
    let f = spec.value(&x)?;
    if !f.is_finite() {
        return Err(Error::domain("reference point lies outside the domain"));
    }
    Ok((x, f))
}

/// Iterates `step` until the update stalls at rounding level.
fn fixed_point(mut x: Point, budget: usize, step: impl Fn(&Point) -> Result<Point>) -> Result<Point> {
    let mut stalls = 0;
    for _ in 0..budget {
        let next = step(&x)?;
        let moved = dist_sq(&next, &x)?;
        let scale = 1.0 + norm_sq(&x);
        x = next;
        if moved <= 1e-32 * scale {
            stalls += 1;
            if stalls >= 3 {
                return Ok(x);
            }
        } else {
            stalls = 0;
        }
    }
    Ok(x)
}

/// Dual coordinate ascent for `Σ_j max(0, 1 − b_j⟨a_j, x⟩) + (μ/2)‖x‖²`.
///
/// The dual variables live in `[0, 1]` and `x = (1/μ) Σ_j α_j b_j a_j`; the
/// loop stops once the duality gap is at rounding level.
pub fn hinge_dual_solve(rows: &[Point], labels: &[f64], mu: f64, budget: usize) -> Result<Point> {
    let n = rows[0].dim();
    let mut alpha = vec![0.0; rows.len()];
    let mut x = vec![0.0; n];
    let sq: Vec<f64> = rows.iter().map(norm_sq).collect();
    for _ in 0..budget {
        for (j, a) in rows.iter().enumerate() {
            if sq[j] == 0.0 {
                continue;
            }
            let margin = labels[j] * crate::numerics::dot(a.coords(), &x);
            let new = (alpha[j] + mu * (1.0 - margin) / sq[j]).clamp(0.0, 1.0);
            let delta = new - alpha[j];
            if delta != 0.0 {
                for (xi, ai) in x.iter_mut().zip(a.coords()) {
                    *xi += delta * labels[j] * ai / mu;
                }
                alpha[j] = new;
            }
        }
        let xp = Point::from_computed(x.clone())?;
        let mut primal = 0.5 * mu * norm_sq(&xp);
        let mut dual = -0.5 * mu * norm_sq(&xp);
        for ((a, &b), &al) in rows.iter().zip(labels).zip(&alpha) {
            primal += (1.0 - b * inner(a, &xp)?).max(0.0);
            dual += al;
        }
        if primal - dual <= 1e-14 * (1.0 + primal.abs()) {
            return Ok(xp);
        }
    }
    Err(Error::Validity(
        "hinge dual ascent did not close the duality gap".into(),
    ))
}

/// Worst `f(y) − f_star` over random probes `y` around `x_ref`.
///
/// Probes are pulled into the domain through the proxes of parts that are
/// not finite everywhere, so the check is informative on constrained problems.
pub fn optimality_slack(spec: &ObjectiveSpec, x_ref: &Point, f_star: f64, probes: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 + x_ref.norm();
    let mut worst = f64::INFINITY;
    for _ in 0..probes {
        let u: Vec<f64> = (0..x_ref.dim()).map(|_| StandardNormal.sample(&mut rng)).collect();
        let u = Point::new(u)?;
        let radius = scale * 10f64.powf(rng.random_range(-6.0..0.0)) / u.norm().max(1e-300);
        let mut y = x_ref.axpy(radius, &u)?;
        for i in 0..spec.m() {
            let r = spec.r(i);
            if !r.is_real_valued() {
                y = r.prox(1.0, &y)?;
            }
        }
        let fy = spec.value(&y)?;
        if fy.is_finite() {
            worst = worst.min(fy - f_star);
        }
    }
    Ok(worst)
}

/// Grid search on `[−100, 100]` refined by golden-section search, for 1-D
/// objectives. Returns the minimizer and its value.
pub fn golden_section_1d(spec: &ObjectiveSpec) -> Result<(f64, f64)> {
    if spec.dim() != 1 {
        return Err(Error::contract("golden-section search needs a 1-D objective"));
    }
    let f = |x: f64| -> Result<f64> { spec.value(&Point::new(vec![x])?) };
    let (lo, hi, cells) = (-100.0, 100.0, 20_000usize);
    let h = (hi - lo) / cells as f64;
    let mut best = (f64::INFINITY, 0usize);
    for k in 0..=cells {
        let v = f(lo + k as f64 * h)?;
        if v < best.0 {
            best = (v, k);
        }
    }
    if !best.0.is_finite() {
        return Err(Error::domain("objective is infinite on the whole grid"));
    }
    let k = best.1;
    let (mut a, mut b) = (lo + k.saturating_sub(1) as f64 * h, lo + (k + 1).min(cells) as f64 * h);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > 1e-13 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    let mut x = 0.5 * (a + b);
    let mut fx = f(x)?;
    // the bracket ends are candidates too when the minimum sits on a domain boundary
    for cand in [a, b, lo + k as f64 * h] {
        let v = f(cand)?;
        if v < fx {
            (x, fx) = (cand, v);
        }
    }
    Ok((x, fx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_problem_loads_and_declares_valid_algorithms() {
        let all = catalog().unwrap();
        assert_eq!(all.len(), PROBLEM_IDS.len());
        for p in &all {
            assert!(
                p.spec.value(&p.x1).unwrap().is_finite(),
                "{} starts outside the domain",
                p.id
            );
            for a in &p.algorithms {
                p.check_algorithm(*a).unwrap();
            }
            let fx = p.spec.value(&p.x_ref).unwrap();
            assert!(fx - p.f_star <= 1e-10 * (1.0 + p.f_star.abs()));
        }
    }

    #[test]
    fn one_dimensional_references() {
        let q = problem("quad_abs_1d").unwrap();
        assert!((q.x_ref[0] - 1.0).abs() < 1e-12 && (q.f_star - 1.5).abs() < 1e-12);
        let a = problem("abs_box_1d").unwrap();
        assert!(a.x_ref[0].abs() < 1e-12 && a.f_star.abs() < 1e-12);
        let t = problem("two_quads_1d").unwrap();
        assert!(t.x_ref[0].abs() < 1e-12 && (t.f_star - 1.0).abs() < 1e-12);
        let h = problem("quad_halfline_1d").unwrap();
        assert!(h.x_ref[0].abs() < 1e-12 && (h.f_star - 2.0).abs() < 1e-12);
    }

    #[test]
    fn golden_section_agrees_with_reference_values() {
        for id in ["quad_abs_1d", "abs_box_1d", "two_quads_1d", "quad_halfline_1d"] {
            let p = problem(id).unwrap();
            let (_, f) = golden_section_1d(&p.spec).unwrap();
            assert!((f - p.f_star).abs() <= 1e-10, "{id}: {f} vs {}", p.f_star);
        }
    }

    #[test]
    fn large_lambda_lasso_has_zero_solution() {
        let p = problem("lasso_zero").unwrap();
        assert!(p.x_ref.coords().iter().all(|&v| v == 0.0));
        let l = p.spec.l(0);
        let half_b_sq = l.value(&Point::zeros(p.spec.dim())).unwrap();
        assert_eq!(p.f_star, half_b_sq);
    }

    #[test]
    fn box_l1_reference_is_the_center() {
        let p = problem("box_l1").unwrap();
        assert!(p.f_star.abs() < 1e-12);
        assert_eq!(p.b_analytic, Some(10f64.sqrt()));
        let opt = optimality_slack(&p.spec, &p.x_ref, p.f_star, 1000, 7).unwrap();
        assert!(opt >= -1e-8);
    }

    #[test]
    fn ball_linear_reference_is_minus_unit_c() {
        let p = problem("ball_linear").unwrap();
        let c = p.b_analytic.unwrap();
        assert!((p.f_star + c).abs() < 1e-12);
    }

    #[test]
    fn hinge_blocks_share_one_reference() {
        let f1 = problem("hinge_sum_m1").unwrap();
        let f3 = problem("hinge_sum_m3").unwrap();
        let f10 = problem("hinge_sum_m10").unwrap();
        assert_eq!(f1.x_ref, f3.x_ref);
        assert!((f1.f_star - f3.f_star).abs() < 1e-12 && (f1.f_star - f10.f_star).abs() < 1e-12);
        assert_eq!(f10.spec.m(), 10);
    }

    #[test]
    fn capability_flags_gate_algorithms() {
        let b = problem("box_l1").unwrap();
        assert!(matches!(
            b.check_algorithm(Algorithm::DouglasRachford),
            Err(Error::Config(_))
        ));
        let l = problem("lasso_small").unwrap();
        assert!(l.check_algorithm(Algorithm::ProjectedSubgradient).is_err());
        assert!(l.beta_analytic.unwrap() > 0.0);
        assert!(problem("nope").is_err());
    }

    #[test]
    fn descriptor_round_trips() {
        let p = problem("lasso_small").unwrap();
        let d = p.descriptor();
        let back: ProblemDescriptor = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
        assert_eq!(back, d);
        assert_eq!(d.params["n"], 20.0);
    }
}
