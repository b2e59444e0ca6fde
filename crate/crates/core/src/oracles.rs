//! Convex building blocks with value, subgradient and proximity oracles.
//!
//! `value` returns `+inf` outside the effective domain. `subgradient` returns
//! one canonical element of the subdifferential: the zero element whenever it
//! belongs to the set, otherwise the coordinatewise sign choice. `prox(step, x)`
//! is the minimizer of `step * f(y) + ½‖y − x‖²`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numerics::{check_dims, dist_sq, inner, norm_sq, Point};

pub trait ConvexFunction: fmt::Debug + Send + Sync {
    fn name(&self) -> &'static str;

    fn dim(&self) -> usize;

    fn value(&self, x: &Point) -> Result<f64>;

    fn subgradient(&self, x: &Point) -> Result<Point>;

    fn has_prox(&self) -> bool {
        false
    }

    fn prox(&self, step: f64, x: &Point) -> Result<Point> {
        let _ = (step, x);
        Err(Error::config(format!("{} has no proximity operator", self.name())))
    }

    /// Uniform bound on subgradient norms, when one exists.
    fn lipschitz_bound(&self) -> Option<f64> {
        None
    }

    /// Lipschitz constant of the gradient, for differentiable functions.
    fn smoothness_bound(&self) -> Option<f64> {
        None
    }

    /// True when the function is finite on the whole space.
    fn is_real_valued(&self) -> bool {
        true
    }
}

pub type FunctionOracle = Arc<dyn ConvexFunction>;

/// An element of the ε-subdifferential together with its certified ε.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsSubgradient {
    pub g: Point,
    pub eps: f64,
}

/// Queries the canonical subgradient and enforces the declared norm bound.
pub fn checked_subgradient(f: &dyn ConvexFunction, x: &Point) -> Result<Point> {
    let g = f.subgradient(x)?;
    if let Some(b) = f.lipschitz_bound() {
        let n = g.norm();
        if n > b * (1.0 + 1e-12) + 1e-300 {
            return Err(Error::contract(format!(
                "{}: subgradient norm {n} exceeds declared bound {b}",
                f.name()
            )));
        }
    }
    Ok(g)
}

fn finite_value(f: &dyn ConvexFunction, x: &Point, what: &str) -> Result<f64> {
    let v = f.value(x)?;
    if !v.is_finite() {
        return Err(Error::domain(format!("{what} lies outside dom {}", f.name())));
    }
    Ok(v)
}

/// Takes the exact subgradient at `y` and certifies it as an ε-subgradient at `x`.
///
/// With `g ∈ ∂f(y)`, convexity gives `f(z) ≥ f(x) + ⟨g, z − x⟩ − ε` for every `z`
/// where `ε = f(x) − f(y) − ⟨g, x − y⟩ ≥ 0`.
pub fn eps_subgradient_at_shifted_point(f: &dyn ConvexFunction, x: &Point, y: &Point) -> Result<EpsSubgradient> {
    check_dims(x, y)?;
    let fx = finite_value(f, x, "x")?;
    let fy = finite_value(f, y, "y")?;
    let g = checked_subgradient(f, y)?;
    let eps = fx - fy - inner(&g, &x.sub(y)?)?;
    // rounding can push an exact zero slightly negative
    Ok(EpsSubgradient { g, eps: eps.max(0.0) })
}

/// Coordinatewise soft-thresholding at level `lambda * weight`.
pub fn prox_l1(lambda: f64, weight: f64, x: &Point) -> Point {
    let tau = lambda * weight;
    x.map(|v| soft_threshold(v, tau))
}

fn soft_threshold(v: f64, tau: f64) -> f64 {
    if v > tau {
        v - tau
    } else if v < -tau {
        v + tau
    } else {
        0.0
    }
}

/// Coordinatewise clamp onto `[lo, hi]`. Bounds may be infinite.
pub fn project_box(lo: &[f64], hi: &[f64], x: &Point) -> Result<Point> {
    if lo.len() != x.dim() || hi.len() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: lo.len().max(hi.len()),
        });
    }
    check_box(lo, hi)?;
    let coords = x
        .coords()
        .iter()
        .zip(lo.iter().zip(hi))
        .map(|(&v, (&l, &h))| v.max(l).min(h))
        .collect();
    Point::from_computed(coords)
}

fn check_box(lo: &[f64], hi: &[f64]) -> Result<()> {
    for (i, (l, h)) in lo.iter().zip(hi).enumerate() {
        if l.is_nan() || h.is_nan() || l > h {
            return Err(Error::contract(format!("infeasible box at coordinate {i}: [{l}, {h}]")));
        }
    }
    Ok(())
}

pub fn project_ball(radius: f64, center: &Point, x: &Point) -> Result<Point> {
    let d = x.sub(center)?;
    let r = d.norm();
    if r <= radius {
        return Ok(x.clone());
    }
    center.axpy(radius / r, &d)
}

/// Prox of `½‖Ay − b‖²`: solves `(I + λAᵀA) p = x + λAᵀb` by Cholesky.
pub fn prox_quadratic(lambda: f64, a: &DMatrix<f64>, b: &DVector<f64>, x: &Point) -> Result<Point> {
    if a.ncols() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.ncols(),
            got: x.dim(),
        });
    }
    if a.nrows() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: b.len(),
        });
    }
    let n = x.dim();
    let ata = a.transpose() * a;
    let system = DMatrix::<f64>::identity(n, n) + ata * lambda;
    let rhs = DVector::from_column_slice(x.coords()) + a.transpose() * b * lambda;
    let chol = system
        .cholesky()
        .ok_or_else(|| Error::domain("proximal system is not positive definite"))?;
    Point::from_computed(chol.solve(&rhs).as_slice().to_vec())
}

fn ensure_step(step: f64) -> Result<()> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::contract(format!("prox step must be positive, got {step}")));
    }
    Ok(())
}

fn ensure_dim(expected: usize, x: &Point) -> Result<()> {
    if x.dim() != expected {
        return Err(Error::DimensionMismatch { expected, got: x.dim() });
    }
    Ok(())
}

/// The zero function.
#[derive(Debug, Clone)]
pub struct Zero {
    pub dim: usize,
}

impl ConvexFunction for Zero {
    fn name(&self) -> &'static str {
        "zero"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &Point) -> Result<f64> {
        ensure_dim(self.dim, x)?;
        Ok(0.0)
    }

    fn subgradient(&self, x: &Point) -> Result<Point> {
        ensure_dim(self.dim, x)?;
        Ok(Point::zeros(self.dim))
    }

    fn has_prox(&self) -> bool {
        true
    }

    fn prox(&self, step: f64, x: &Point) -> Result<Point> {
        ensure_step(step)?;
        ensure_dim(self.dim, x)?;
        Ok(x.clone())
    }

    fn lipschitz_bound(&self) -> Option<f64> {
        Some(0.0)
    }

    fn smoothness_bound(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// `weight · ‖x − center‖₁`.
#[derive(Debug, Clone)]
pub struct L1Norm {
    pub weight: f64,
    pub center: Point,
}

impl L1Norm {
    pub fn new(weight: f64, dim: usize) -> Self {
        L1Norm {
            weight,
            center: Point::zeros(dim),
        }
    }

    pub fn centered(weight: f64, center: Point) -> Self {
        L1Norm { weight, center }
    }
}

impl ConvexFunction for L1Norm {
    fn name(&self) -> &'static str {
        "l1"
    }

    fn dim(&self) -> usize {
        self.center.dim()
    }

    fn value(&self, x: &Point) -> Result<f64> {
        let d = x.sub(&self.center)?;
        let mut s = 0.0;
        for v in d.coords() {
            s += v.abs();
        }
        Ok(self.weight * s)
    }

    fn subgradient(&self, x: &Point) -> Result<Point> {
        let w = self.weight;
        x.zip_with(&self.center, |v, c| {
            if v > c {
                w
            } else if v < c {
                -w
            } else {
                0.0
            }
        })
    }

    fn has_prox(&self) -> bool {
        true
    }

    fn prox(&self, step: f64, x: &Point) -> Result<Point> {
        ensure_step(step)?;
        let shifted = prox_l1(step, self.weight, &x.sub(&self.center)?);
        shifted.add(&self.center)
    }

    fn lipschitz_bound(&self) -> Option<f64> {
        Some(self.weight * (self.dim() as f64).sqrt())
    }
}

/// `½‖Ax − b‖²` with a dense `A`.
#[derive(Debug, Clone)]
pub struct Quadratic {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    beta: f64,
}

impl Quadratic {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                got: b.len(),
            });
        }
        let beta = spectral_norm_sq(&a);
        Ok(Quadratic { a, b, beta })
    }

    fn residual(&self, x: &Point) -> Result<DVector<f64>> {
        ensure_dim(self.a.ncols(), x)?;
        Ok(&self.a * DVector::from_column_slice(x.coords()) - &self.b)
    }
}

/// Largest eigenvalue of `AᵀA`.
pub fn spectral_norm_sq(a: &DMatrix<f64>) -> f64 {
    let ata = a.transpose() * a;
    ata.symmetric_eigenvalues().iter().cloned().fold(0.0, f64::max)
}

impl ConvexFunction for Quadratic {
    fn name(&self) -> &'static str {
        "quadratic"
    }

    fn dim(&self) -> usize {
        self.a.ncols()
    }

    fn value(&self, x: &Point) -> Result<f64> {
        let r = self.residual(x)?;
        Ok(0.5 * crate::numerics::dot(r.as_slice(), r.as_slice()))
    }

    fn subgradient(&self, x: &Point) -> Result<Point> {
        let r = self.residual(x)?;
        Point::from_computed((self.a.transpose() * r).as_slice().to_vec())
    }

    fn has_prox(&self) -> bool {
        true
    }

    fn prox(&self, step: f64, x: &Point) -> Result<Point> {
        ensure_step(step)?;
        prox_quadratic(step, &self.a, &self.b, x)
    }

    fn smoothness_bound(&self) -> Option<f64> {
        Some(self.beta)
    }
}

/// `(weight/2)·‖x‖²`.
#[derive(Debug, Clone)]
pub struct SquaredNorm {
    pub weight: f64,
    pub dim: usize,
}

impl ConvexFunction for SquaredNorm {
    fn name(&self) -> &'static str {
        "squared_norm"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &Point) -> Result<f64> {
        ensure_dim(self.dim, x)?;
        Ok(0.5 * self.weight * norm_sq(x))
    }

    fn subgradient(&self, x: &Point) -> Result<Point> {
        ensure_dim(self.dim, x)?;
        Ok(x.scale(self.weight))
    }

    fn has_prox(&self) -> bool {
        true
    }

    fn prox(&self, step: f64, x: &Point) -> Result<Point> {
        ensure_step(step)?;
        ensure_dim(self.dim, x)?;
        Ok(x.scale(1.0 / (1.0 + step * self.weight)))
    }

    fn smoothness_bound(&self) -> Option<f64> {
        Some(self.weight)
    }
}

/// `⟨c, x⟩`.
#[derive(Debug, Clone)]
pub struct Linear {
    pub c: Point,
}

impl ConvexFunction for Linear {
    fn name(&self) -> &'static str {
        "linear"
    }

    fn dim(&self) -> usize {
        self.c.dim()
    }

    fn value(&self, x: &Point) -> Result<f64> {
        inner(&self.c, x)
    }

    fn subgradient(&self, x: &Point) -> Result<Point> {
        ensure_dim(self.c.dim(), x)?;
        Ok(self.c.clone())
    }

    fn has_prox(&self) -> bool {
        true
    }

    fn prox(&self, step: f64, x: &Point) -> Result<Point> {
        ensure_step(step)?;
        x.axpy(-step, &self.c)
    }

    fn lipschitz_bound(&self) -> Option<f64> {
        Some(self.c.norm())
    }

    fn smoothness_bound(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// Indicator of the box `[lo, hi]`; bounds may be infinite.
#[derive(Debug, Clone)]
pub struct BoxIndicator {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxIndicator {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::contract("box bounds must be nonempty and of equal length"));
        }
        check_box(&lo, &hi)?;
        Ok(BoxIndicator { lo, hi })
    }

    pub fn cube(dim: usize, half_width: f64) -> Self {
        BoxIndicator {
            lo: vec![-half_width; dim],
            hi: vec![half_width; dim],
        }
    }

    pub fn contains(&self, x: &Point) -> bool {
        x.dim() == self.lo.len()
            && x.coords()
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(&v, (&l, &h))| l <= v && v <= h)
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.iter().chain(&self.hi).all(|v| v.is_finite())
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }
}

impl ConvexFunction for BoxIndicator {
    fn name(&self) -> &'static str {
        "box_indicator"
    }

    fn dim(&self) -> usize {
        self.lo.len()
    }

    fn value(&self, x: &Point) -> Result<f64> {
        ensure_dim(self.lo.len(), x)?;
        Ok(if self.contains(x) { 0.0 } else { f64::INFINITY })
    }

    fn subgradient(&self, x: &Point) -> Result<Point> {
        ensure_dim(self.lo.len(), x)?;
        if !self.contains(x) {
            return Err(Error::domain("subgradient of a box indicator outside the box"));
        }
        // zero always lies in the normal cone
        Ok(Point::zeros(self.lo.len()))
    }

    fn has_prox(&self) -> bool {
        true
    }

    fn prox(&self, step: f64, x: &Point) -> Result<Point> {
        ensure_step(step)?;
        project_box(&self.lo, &self.hi, x)
    }

    fn is_real_valued(&self) -> bool {
        false
    }
}

/// Indicator of the closed ball `‖x − center‖ ≤ radius`.
#[derive(Debug, Clone)]
pub struct BallIndicator {
    pub center: Point,
    pub radius: f64,
}

impl BallIndicator {
    pub fn contains(&self, x: &Point) -> bool {
        // a relative slack absorbs rounding from the radial rescaling
        dist_sq(x, &self.center)
            .map(|d| d.sqrt() <= self.radius * (1.0 + 1e-14))
            .unwrap_or(false)
    }
}

impl ConvexFunction for BallIndicator {
    fn name(&self) -> &'static str {
        "ball_indicator"
    }

    fn dim(&self) -> usize {
        self.center.dim()
    }

    fn value(&self, x: &Point) -> Result<f64> {
        ensure_dim(self.center.dim(), x)?;
        Ok(if self.contains(x) { 0.0 } else { f64::INFINITY })
    }

    fn subgradient(&self, x: &Point) -> Result<Point> {
        ensure_dim(self.center.dim(), x)?;
        if !self.contains(x) {
            return Err(Error::domain("subgradient of a ball indicator outside the ball"));
        }
        Ok(Point::zeros(self.center.dim()))
    }

    fn has_prox(&self) -> bool {
        true
    }

    fn prox(&self, step: f64, x: &Point) -> Result<Point> {
        ensure_step(step)?;
        project_ball(self.radius, &self.center, x)
    }

    fn is_real_valued(&self) -> bool {
        false
    }
}

/// `Σ_j max(0, 1 − b_j⟨a_j, x⟩)` over a block of labelled rows.
#[derive(Debug, Clone)]
pub struct HingeSum {
    rows: Vec<Point>,
    labels: Vec<f64>,
}

impl HingeSum {
    pub fn new(rows: Vec<Point>, labels: Vec<f64>) -> Result<Self> {
        if rows.is_empty() || rows.len() != labels.len() {
            return Err(Error::contract("hinge block needs matching nonempty rows and labels"));
        }
        let d = rows[0].dim();
        if rows.iter().any(|r| r.dim() != d) {
            return Err(Error::contract("hinge rows must share one dimension"));
        }
        Ok(HingeSum { rows, labels })
    }

    pub fn rows(&self) -> &[Point] {
        &self.rows
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }
}

impl ConvexFunction for HingeSum {
    fn name(&self) -> &'static str {
        "hinge_sum"
    }

    fn dim(&self) -> usize {
        self.rows[0].dim()
    }

    fn value(&self, x: &Point) -> Result<f64> {
        let mut s = 0.0;
        for (a, &b) in self.rows.iter().zip(&self.labels) {
            s += (1.0 - b * inner(a, x)?).max(0.0);
        }
        Ok(s)
    }

    fn subgradient(&self, x: &Point) -> Result<Point> {
        let mut g = Point::zeros(self.dim());
        for (a, &b) in self.rows.iter().zip(&self.labels) {
            // at the kink the term's subdifferential contains zero
            if 1.0 - b * inner(a, x)? > 0.0 {
                g = g.axpy(-b, a)?;
            }
        }
        Ok(g)
    }

    fn lipschitz_bound(&self) -> Option<f64> {
        Some(self.rows.iter().map(|a| a.norm()).sum())
    }
}
