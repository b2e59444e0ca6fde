//! Closed-form objective-gap bounds for modified Fejér sequences.
//!
//! A sequence `x_t` with constants `(η_t, ξ_t)` satisfies
//! `‖x_{t+1} − x‖² ≤ ‖x_t − x‖² − η_t (f(x_t) − f(x)) + ξ_t`. The functions here
//! turn those constants into bounds on `f(x_T) − f_*`. Logarithms are natural.
//! `d_sq` is always an upper bound on the squared distance from `x_1` to the
//! solution set; every bound is monotone in it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `η_t = eta·t^(−theta1)` together with the envelope `ξ_t ≤ xi·t^(−theta2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolySchedule {
    pub eta: f64,
    pub theta1: f64,
    pub xi: f64,
    pub theta2: f64,
}

impl PolySchedule {
    pub fn new(eta: f64, theta1: f64, xi: f64, theta2: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::Precondition(format!("eta must be positive, got {eta}")));
        }
        if !(0.0..1.0).contains(&theta1) {
            return Err(Error::Precondition(format!("theta1 must lie in [0, 1), got {theta1}")));
        }
        if !(xi >= 0.0 && xi.is_finite()) || !(theta2 >= 0.0 && theta2.is_finite()) {
            return Err(Error::Precondition("xi and theta2 must be nonnegative".into()));
        }
        Ok(PolySchedule {
            eta,
            theta1,
            xi,
            theta2,
        })
    }

    pub fn eta_at(&self, t: usize) -> f64 {
        self.eta * (t as f64).powf(-self.theta1)
    }

    pub fn xi_at(&self, t: usize) -> f64 {
        self.xi * (t as f64).powf(-self.theta2)
    }

    /// The induced exact sequences for `t = 1..=len`, stored at index `t − 1`.
    pub fn sequences(&self, len: usize) -> (Vec<f64>, Vec<f64>) {
        (1..=len).map(|t| (self.eta_at(t), self.xi_at(t))).unzip()
    }
}

/// The constant `c_θ` multiplying the error term of the polynomial-rate bound.
///
/// The three branches are evaluated as stated; they do not meet continuously at 1.
pub fn c_theta(theta2: f64) -> f64 {
    if theta2 < 1.0 {
        5.0 + 2.0 / (1.0 - theta2)
    } else if theta2 == 1.0 {
        9.0
    } else {
        (2f64.powf(theta2) + 3.0 * theta2 - 1.0) / (theta2 - 1.0)
    }
}

/// `Σ_{t=1}^{T−1} w_t / (T − t)` with four interleaved accumulators.
fn harmonic_tail(xi: &[f64], t_cap: usize) -> f64 {
    let mut acc = [0.0f64; 4];
    for t in 1..t_cap {
        acc[t % 4] += xi[t - 1] / (t_cap - t) as f64;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3])
}

fn check_eta(eta: &[f64], t_cap: usize) -> Result<()> {
    for t in 1..t_cap {
        let (a, b) = (eta[t - 1], eta[t]);
        if !(a >= 0.0 && b >= 0.0) {
            return Err(Error::Precondition(format!("eta_{t} must be nonnegative")));
        }
        if b > a * (1.0 + 4.0 * f64::EPSILON) {
            return Err(Error::Precondition(format!(
                "eta must be non-increasing: eta_{} = {b} > eta_{t} = {a}",
                t + 1
            )));
        }
    }
    if !(eta[t_cap - 1] > 0.0) {
        return Err(Error::Precondition("eta_T must be positive".into()));
    }
    Ok(())
}

/// Bound on `f(x_T) − f_*` from explicit `(η_t, ξ_t)` sequences (index `t − 1`):
/// `[d_sq/T + Σ_{t<T} ξ_t/(T − t) + ξ_T] / η_T`.
pub fn bound_thm22(d_sq: f64, eta: &[f64], xi: &[f64], t_cap: usize) -> Result<f64> {
    if t_cap < 2 {
        return Err(Error::Validity(format!("needs T > 1, got {t_cap}")));
    }
    if eta.len() < t_cap || xi.len() < t_cap {
        return Err(Error::contract("eta/xi sequences shorter than T"));
    }
    check_eta(eta, t_cap)?;
    let n = t_cap as f64;
    let numer = d_sq / n + harmonic_tail(xi, t_cap) + xi[t_cap - 1];
    Ok(numer / eta[t_cap - 1])
}

/// `bound_thm22` for every `T` in `2..=eta.len()`; entry `k` holds `T = k + 2`.
pub fn bound_thm22_curve(d_sq: f64, eta: &[f64], xi: &[f64]) -> Result<Vec<f64>> {
    let len = eta.len().min(xi.len());
    if len < 2 {
        return Ok(Vec::new());
    }
    check_eta(eta, len)?;
    Ok((2..=len)
        .map(|t_cap| {
            let numer = d_sq / t_cap as f64 + harmonic_tail(xi, t_cap) + xi[t_cap - 1];
            numer / eta[t_cap - 1]
        })
        .collect())
}

/// The `ξ ≡ 0` specialization: `d_sq / (η_T · T)`.
pub fn bound_cor23(d_sq: f64, eta_t: f64, t_cap: usize) -> f64 {
    debug_assert!(t_cap > 1 && eta_t > 0.0);
    (d_sq / t_cap as f64) / eta_t
}

/// Polynomial-schedule bound
/// `(d_sq/η) T^{θ₁−1} + (ξ c_{θ₂}/η) (log T)^{[θ₂ ≤ 1]} T^{θ₁ − min(θ₂, 1)}`, valid for `T ≥ 3`.
pub fn bound_thm24(d_sq: f64, s: &PolySchedule, t_cap: usize) -> Result<f64> {
    if t_cap < 3 {
        return Err(Error::Validity(format!("needs T >= 3, got {t_cap}")));
    }
    if !(0.0..1.0).contains(&s.theta1) {
        return Err(Error::Precondition(format!(
            "theta1 must lie in [0, 1), got {}",
            s.theta1
        )));
    }
    let n = t_cap as f64;
    let log_factor = if s.theta2 <= 1.0 { n.ln() } else { 1.0 };
    let first = d_sq / s.eta * n.powf(s.theta1 - 1.0);
    let second = s.xi * c_theta(s.theta2) / s.eta * log_factor * n.powf(s.theta1 - s.theta2.min(1.0));
    Ok(first + second)
}

/// Upper bound on `Σ_{t=1}^{T−1} t^{−q}/(T − t)` for `T ≥ 3`.
pub fn lemma25_bound(q: f64, t_cap: usize) -> f64 {
    assert!(t_cap >= 3, "the estimate is stated for T >= 3");
    assert!(q >= 0.0, "q must be nonnegative");
    let n = t_cap as f64;
    if q < 1.0 {
        (4.0 + 2.0 / (1.0 - q)) * n.powf(-q) * n.ln()
    } else if q == 1.0 {
        8.0 * n.ln() / n
    } else {
        (2f64.powf(q) + 2.0 * q) / (q - 1.0) / n
    }
}

/// The exact sum `Σ_{t=1}^{T−1} t^{−q}/(T − t)`.
pub fn lemma25_brute(q: f64, t_cap: usize) -> f64 {
    let mut s = 0.0;
    for t in 1..t_cap {
        s += (t as f64).powf(-q) / (t_cap - t) as f64;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn c_theta_spot_values() {
        assert_eq!(c_theta(1.0), 9.0);
        assert!((c_theta(0.0) - 7.0).abs() < 1e-15);
        assert!((c_theta(2.0) - 9.0).abs() < 1e-15);
        assert!((c_theta(0.5) - 9.0).abs() < 1e-15);
    }

    #[test]
    fn thm22_examples() {
        let b = bound_thm22(1.0, &[1.0; 3], &[1.0; 3], 3).unwrap();
        assert!((b - 17.0 / 6.0).abs() < 1e-15);
        let b = bound_thm22(1.0, &[1.0; 10], &[0.0; 10], 10).unwrap();
        assert!((b - 0.1).abs() < 1e-15);
        assert_eq!(bound_thm22(0.0, &[1.0; 5], &[0.0; 5], 5).unwrap(), 0.0);
    }

    #[test]
    fn thm22_rejects_increasing_eta_and_small_t() {
        let err = bound_thm22(1.0, &[1.0, 2.0, 2.0], &[0.0; 3], 3).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
        assert!(matches!(bound_thm22(1.0, &[1.0], &[0.0], 1), Err(Error::Validity(_))));
    }

    #[test]
    fn cor23_examples() {
        assert!((bound_cor23(1.0, 1.0, 10) - 0.1).abs() < 1e-15);
        assert_eq!(bound_cor23(4.0, 2.0, 2), 1.0);
        assert!((bound_cor23(1.0, 0.5, 100) - 0.02).abs() < 1e-15);
    }

    #[test]
    fn thm22_with_zero_xi_is_cor23_exactly() {
        for t_cap in 2..200 {
            let eta: Vec<f64> = (1..=t_cap).map(|t| 3.0 / (t as f64).sqrt()).collect();
            let b22 = bound_thm22(2.5, &eta, &vec![0.0; t_cap], t_cap).unwrap();
            assert_eq!(b22, bound_cor23(2.5, eta[t_cap - 1], t_cap));
        }
    }

    #[test]
    fn thm24_examples() {
        let s = PolySchedule::new(1.0, 0.0, 0.0, 0.7).unwrap();
        assert!((bound_thm24(1.0, &s, 10).unwrap() - 0.1).abs() < 1e-15);
        let s = PolySchedule::new(1.0, 0.0, 1.0, 1.0).unwrap();
        let expected = 0.1 + 9.0 * 10f64.ln() / 10.0;
        assert!((bound_thm24(1.0, &s, 10).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 2.1723).abs() < 1e-4);
        assert!(matches!(bound_thm24(1.0, &s, 2), Err(Error::Validity(_))));
    }

    #[test]
    fn thm24_dominates_thm22_on_a_forward_backward_schedule() {
        // alpha = 1, B = 1, eps = 0.5: eta = 2, xi = 10 B² + 2 eps = 11, theta = 1/2
        let s = PolySchedule::new(2.0, 0.5, 11.0, 1.0).unwrap();
        let (eta, xi) = s.sequences(10_000);
        let curve = bound_thm22_curve(1.0, &eta, &xi).unwrap();
        for t_cap in 3..=10_000 {
            let b24 = bound_thm24(1.0, &s, t_cap).unwrap();
            assert!(b24 >= curve[t_cap - 2], "T = {t_cap}");
        }
    }

    #[test]
    fn lemma25_examples() {
        assert!((lemma25_bound(1.0, 3) - 8.0 * 3f64.ln() / 3.0).abs() < 1e-15);
        assert!((lemma25_bound(1.0, 3) - 2.9296).abs() < 1e-4);
        assert!((lemma25_brute(1.0, 3) - 1.0).abs() < 1e-15);
        assert!((lemma25_bound(0.0, 3) - 6.0 * 3f64.ln()).abs() < 1e-14);
        assert!((lemma25_bound(0.0, 3) - 6.5917).abs() < 1e-4);
        assert_eq!(lemma25_brute(0.0, 3), 1.5);
        assert!((lemma25_bound(2.0, 3) - 8.0 / 3.0).abs() < 1e-15);
        assert_eq!(lemma25_brute(2.0, 3), 0.75);
        let direct = 1.0 / 3.0 + 0.5 / 2f64.sqrt() + 1.0 / 3f64.sqrt();
        assert!((lemma25_brute(0.5, 4) - direct).abs() < 1e-15);
        assert!((direct - 1.2642).abs() < 1e-4);
    }

    #[test]
    fn curve_matches_pointwise_bound() {
        let s = PolySchedule::new(0.4, 0.3, 2.0, 0.6).unwrap();
        let (eta, xi) = s.sequences(300);
        let curve = bound_thm22_curve(1.7, &eta, &xi).unwrap();
        for t_cap in 2..=300 {
            assert_eq!(curve[t_cap - 2], bound_thm22(1.7, &eta, &xi, t_cap).unwrap());
        }
    }

    proptest! {
        #[test]
        fn bounds_are_monotone_in_d_sq_and_xi(
            d in 0.0f64..10.0, dd in 0.0f64..5.0,
            xi in 0.0f64..10.0, dxi in 0.0f64..5.0,
            eta in 0.1f64..5.0, th1 in 0.0f64..0.95, th2 in 0.0f64..3.0,
            t_cap in 3usize..400,
        ) {
            let lo = PolySchedule::new(eta, th1, xi, th2).unwrap();
            let hi = PolySchedule::new(eta, th1, xi + dxi, th2).unwrap();
            let b = bound_thm24(d, &lo, t_cap).unwrap();
            prop_assert!(bound_thm24(d + dd, &lo, t_cap).unwrap() >= b);
            prop_assert!(bound_thm24(d, &hi, t_cap).unwrap() >= b);

            let (e, x_lo) = lo.sequences(t_cap);
            let (_, x_hi) = hi.sequences(t_cap);
            let b22 = bound_thm22(d, &e, &x_lo, t_cap).unwrap();
            prop_assert!(bound_thm22(d + dd, &e, &x_lo, t_cap).unwrap() >= b22);
            prop_assert!(bound_thm22(d, &e, &x_hi, t_cap).unwrap() >= b22);
        }

        #[test]
        fn lemma25_holds_on_random_inputs(q in 0.0f64..4.0, t_cap in 3usize..600) {
            prop_assert!(lemma25_brute(q, t_cap) <= lemma25_bound(q, t_cap));
        }
    }
}
