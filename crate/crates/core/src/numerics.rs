//! Dense real vectors and the reductions every other module builds on.
//!
//! All sums run strictly left to right over the coordinates. Reruns therefore
//! reproduce traces bit for bit, and `inner(a, b) == inner(b, a)` holds exactly
//! because each term `a_i * b_i` is itself commutative.

use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the (finite-dimensional) search space.
///
/// Coordinates are finite and the dimension is at least one. Points are
/// immutable; arithmetic returns new points.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::contract("a point needs at least one coordinate"));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::contract(format!("coordinate {i} is not finite ({})", coords[i])));
        }
        Ok(Point(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least one");
        Point(vec![0.0; dim])
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(coords.to_vec())
    }

    /// Builds a point from coordinates produced by a trusted computation.
    ///
    /// Non-finite values here mean an algorithm diverged, which is reported
    /// as a domain error rather than a contract violation.
    pub(crate) fn from_computed(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("iterate left the finite range"));
        }
        Ok(Point(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm_sq(self).sqrt()
    }

    pub fn add(&self, other: &Point) -> Result<Point> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Point) -> Result<Point> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Point {
        Point(self.0.iter().map(|a| a * s).collect())
    }

    /// `self + s * dir`.
    pub fn axpy(&self, s: f64, dir: &Point) -> Result<Point> {
        self.zip_with(dir, |a, d| a + s * d)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Point {
        Point(self.0.iter().map(|&a| f(a)).collect())
    }

    pub fn zip_with(&self, other: &Point, f: impl Fn(f64, f64) -> f64) -> Result<Point> {
        check_dims(self, other)?;
        Ok(Point(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect()))
    }
}

impl Index<usize> for Point {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Point{:?}", self.0)
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Vec<f64> {
        p.0
    }
}

pub(crate) fn check_dims(a: &Point, b: &Point) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(())
}

/// Left-to-right sum of `a_i * b_i`.
pub fn inner(a: &Point, b: &Point) -> Result<f64> {
    check_dims(a, b)?;
    Ok(dot(&a.0, &b.0))
}

pub fn norm_sq(a: &Point) -> f64 {
    dot(&a.0, &a.0)
}

/// `‖a − b‖²` without materializing the difference.
pub fn dist_sq(a: &Point, b: &Point) -> Result<f64> {
    check_dims(a, b)?;
    Ok(dist_sq_slice(&a.0, &b.0))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

pub(crate) fn dist_sq_slice(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        s += d * d;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(v: &[f64]) -> Point {
        Point::from_slice(v).unwrap()
    }

    #[test]
    fn inner_examples() {
        assert_eq!(inner(&p(&[1.0, 2.0]), &p(&[3.0, 4.0])).unwrap(), 11.0);
        assert_eq!(inner(&p(&[0.0, 0.0]), &p(&[5.0, 7.0])).unwrap(), 0.0);
        assert_eq!(inner(&p(&[1.0; 3]), &p(&[1.0; 3])).unwrap(), 3.0);
    }

    #[test]
    fn norm_sq_examples() {
        assert_eq!(norm_sq(&p(&[3.0, 4.0])), 25.0);
        assert_eq!(norm_sq(&p(&[0.0])), 0.0);
        assert_eq!(norm_sq(&p(&[1.0; 4])), 4.0);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let err = inner(&p(&[1.0]), &p(&[1.0, 2.0])).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 1, got: 2 }));
        assert!(p(&[1.0]).sub(&p(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn construction_rejects_bad_coordinates() {
        assert!(Point::new(vec![]).is_err());
        assert!(Point::new(vec![1.0, f64::NAN]).is_err());
        assert!(Point::new(vec![f64::INFINITY]).is_err());
        assert!(serde_json::from_str::<Point>("[]").is_err());
        let q: Point = serde_json::from_str("[1.5,-2.0]").unwrap();
        assert_eq!(q, p(&[1.5, -2.0]));
    }

    fn vec_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..12).prop_flat_map(|n| {
            (
                prop::collection::vec(-1e3f64..1e3, n),
                prop::collection::vec(-1e3f64..1e3, n),
            )
        })
    }

    proptest! {
        #[test]
        fn inner_is_symmetric_bit_exactly((a, b) in vec_pair()) {
            let (a, b) = (p(&a), p(&b));
            prop_assert_eq!(inner(&a, &b).unwrap().to_bits(), inner(&b, &a).unwrap().to_bits());
        }

        #[test]
        fn cauchy_schwarz((a, b) in vec_pair()) {
            let (a, b) = (p(&a), p(&b));
            let ab = inner(&a, &b).unwrap();
            let rhs = norm_sq(&a) * norm_sq(&b);
            prop_assert!(ab * ab <= rhs * (1.0 + 1e-12) + 1e-300);
        }

        #[test]
        fn norm_sq_zero_iff_zero_vector(a in prop::collection::vec(prop_oneof![Just(0.0), -5.0f64..5.0], 1..8)) {
            let is_zero = a.iter().all(|&c| c == 0.0);
            prop_assert_eq!(norm_sq(&p(&a)) == 0.0, is_zero);
        }

        #[test]
        fn dist_sq_matches_difference((a, b) in vec_pair()) {
            let (a, b) = (p(&a), p(&b));
            prop_assert_eq!(dist_sq(&a, &b).unwrap(), norm_sq(&a.sub(&b).unwrap()));
        }
    }
}
