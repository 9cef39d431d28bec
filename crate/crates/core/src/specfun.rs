//! Riccati–Bessel function `ψ₁(z) = z j₁(z) = sin z / z − cos z` and the
//! first positive zero of its derivative.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this `|z|` the Taylor series replaces the trigonometric form.
pub const SERIES_SWITCHOVER: f64 = 1e-2;

const BISECTION_WIDTH: f64 = 1e-6;
const NEWTON_TOL: f64 = 1e-12;
const MAX_NEWTON_STEPS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroResult {
    pub value: f64,
    /// `|ψ₁'(value)|`.
    pub residual: f64,
    /// Bisection plus Newton steps.
    pub iterations: usize,
}

pub fn psi1(z: f64) -> f64 {
    if z.abs() < SERIES_SWITCHOVER {
        psi1_series(z)
    } else {
        z.sin() / z - z.cos()
    }
}

pub fn psi1_prime(z: f64) -> f64 {
    if z.abs() < SERIES_SWITCHOVER {
        psi1_prime_series(z)
    } else {
        let (s, c) = z.sin_cos();
        c / z - s / (z * z) + s
    }
}

/// `ψ₁'' = (2/z² − 1) ψ₁`, from the Riccati–Bessel equation.
pub fn psi1_second(z: f64) -> f64 {
    if z.abs() < SERIES_SWITCHOVER {
        let z2 = z * z;
        2.0 / 3.0 - z2 * (12.0 / 30.0 - z2 * (30.0 / 840.0 - z2 * 56.0 / 45360.0))
    } else {
        (2.0 / (z * z) - 1.0) * psi1(z)
    }
}

/// `z²/3 − z⁴/30 + z⁶/840 − z⁸/45360`.
pub fn psi1_series(z: f64) -> f64 {
    let z2 = z * z;
    z2 * (1.0 / 3.0 - z2 * (1.0 / 30.0 - z2 * (1.0 / 840.0 - z2 / 45360.0)))
}

pub fn psi1_prime_series(z: f64) -> f64 {
    let z2 = z * z;
    z * (2.0 / 3.0 - z2 * (4.0 / 30.0 - z2 * (6.0 / 840.0 - z2 * 8.0 / 45360.0)))
}

/// Root of `ψ₁'` inside `[lo, hi]`: bisection to width 1e-6, then Newton
/// with a bisection fallback whenever a step leaves the bracket.
pub fn find_psi1_prime_zero(lo: f64, hi: f64) -> Result<ZeroResult> {
    let (mut a, mut b) = (lo, hi);
    let mut fa = psi1_prime(a);
    let fb = psi1_prime(b);
    if !(fa * fb < 0.0) {
        return Err(Error::Bracket { lo, hi });
    }
    let mut iterations = 0;
    while b - a > BISECTION_WIDTH {
        let m = 0.5 * (a + b);
        let fm = psi1_prime(m);
        if fm == 0.0 {
            return Ok(ZeroResult { value: m, residual: 0.0, iterations });
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
        iterations += 1;
    }

    let mut x = 0.5 * (a + b);
    for _ in 0..MAX_NEWTON_STEPS {
        let f = psi1_prime(x);
        if f.abs() < NEWTON_TOL {
            break;
        }
        if fa * f < 0.0 {
            b = x;
        } else {
            a = x;
            fa = f;
        }
        let step = x - f / psi1_second(x);
        x = if step > a && step < b { step } else { 0.5 * (a + b) };
        iterations += 1;
    }
    let residual = psi1_prime(x).abs();
    Ok(ZeroResult { value: x, residual, iterations })
}

/// First positive zero `a'₁,₁` of `ψ₁'`, bracketed in `[2, 3]`.
pub fn find_a11_prime() -> Result<ZeroResult> {
    find_psi1_prime_zero(2.0, 3.0)
}

static A11_PRIME: OnceLock<f64> = OnceLock::new();

/// Cached `a'₁,₁`.
pub fn a11_prime() -> f64 {
    *A11_PRIME.get_or_init(|| {
        find_a11_prime().expect("psi1' changes sign on [2, 3]").value
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn exact_values() {
        assert!((psi1(PI) - 1.0).abs() < 1e-15);
        assert!((psi1(PI / 2.0) - 2.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn small_argument_limits() {
        assert!((psi1(1e-4) / 1e-8 - 1.0 / 3.0).abs() < 1e-6);
        assert!((psi1_prime(1e-4) / 1e-4 - 2.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn branches_agree_at_switchover() {
        let z = SERIES_SWITCHOVER;
        assert!((psi1_series(z) - (z.sin() / z - z.cos())).abs() < 1e-12);
        let closed = z.cos() / z - z.sin() / (z * z) + z.sin();
        assert!((psi1_prime_series(z) - closed).abs() < 1e-12);
    }

    #[test]
    fn derivative_matches_central_difference() {
        let eps = 1e-5;
        for z in [0.5, 1.0, 2.7, 5.0] {
            let fd = (psi1(z + eps) - psi1(z - eps)) / (2.0 * eps);
            assert!((psi1_prime(z) - fd).abs() < 1e-8, "z = {z}");
        }
    }

    #[test]
    fn second_derivative_matches_central_difference() {
        let eps = 1e-5;
        for z in [0.005, 0.5, 2.7, 5.0] {
            let fd = (psi1_prime(z + eps) - psi1_prime(z - eps)) / (2.0 * eps);
            assert!((psi1_second(z) - fd).abs() < 1e-8, "z = {z}");
        }
    }

    #[test]
    fn bracket_signs() {
        assert!(psi1_prime(2.0) > 0.0);
        assert!(psi1_prime(3.0) < 0.0);
        assert!(matches!(find_psi1_prime_zero(1.0, 2.0), Err(Error::Bracket { .. })));
    }

    #[test]
    fn a11_prime_value() {
        let z = find_a11_prime().unwrap();
        assert!((z.value - 2.7437).abs() <= 1e-4);
        assert!(z.residual < 1e-12);
        assert!(z.value * z.value < 3.0 * PI * PI);
        assert_eq!(a11_prime(), z.value);
    }

    #[test]
    fn zero_independent_of_bracket() {
        let a = find_psi1_prime_zero(2.0, 3.0).unwrap().value;
        let b = find_psi1_prime_zero(2.5, 2.9).unwrap().value;
        assert!((a - b).abs() < 1e-12);
    }
}
