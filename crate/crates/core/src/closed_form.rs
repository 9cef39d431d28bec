//! Exact first Maxwell eigenvalues of cuboids, cubes and balls.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{check_positive, CuboidDims};
use crate::specfun;

const PI2: f64 = PI * PI;

/// A first eigenvalue `λ₁ > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Eigenvalue(f64);

impl Eigenvalue {
    pub fn new(value: f64) -> Result<Self> {
        check_positive("eigenvalue", value)?;
        Ok(Self(value))
    }

    pub(crate) fn from_raw(value: f64) -> Self {
        Self(value)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Eigenvalue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `π²(1/ℓ₁² + 1/ℓ₂²)`; the shortest side does not enter.
pub fn cuboid_lambda1(c: &CuboidDims) -> Eigenvalue {
    Eigenvalue(PI2 * (1.0 / (c.l1() * c.l1()) + 1.0 / (c.l2() * c.l2())))
}

/// `(a'₁,₁ / R)²`.
pub fn ball_lambda1_radius(radius: f64) -> Result<Eigenvalue> {
    check_positive("radius", radius)?;
    let a = specfun::a11_prime();
    Ok(Eigenvalue((a / radius).powi(2)))
}

/// Ball of surface area `k`: `4π (a'₁,₁)² / k`.
pub fn ball_lambda1_surface(k: f64) -> Result<Eigenvalue> {
    check_positive("k", k)?;
    let a = specfun::a11_prime();
    Ok(Eigenvalue(4.0 * PI * a * a / k))
}

/// Ball of volume `k`: `(a'₁,₁)² (16π² / (9k²))^(1/3)`.
pub fn ball_lambda1_volume(k: f64) -> Result<Eigenvalue> {
    check_positive("k", k)?;
    let a = specfun::a11_prime();
    Ok(Eigenvalue(a * a * (16.0 * PI2 / (9.0 * k * k)).cbrt()))
}

/// Cube of surface area `k` (side `√(k/6)`), which evaluates to `12π²/k`.
pub fn cube_lambda1_surface(k: f64) -> Result<Eigenvalue> {
    check_positive("k", k)?;
    Ok(cuboid_lambda1(&CuboidDims::cube((k / 6.0).sqrt())?))
}

/// Cube of volume `k`, `2π² / k^(2/3)`.
pub fn cube_lambda1_volume(k: f64) -> Result<Eigenvalue> {
    check_positive("k", k)?;
    Ok(cuboid_lambda1(&CuboidDims::cube(k.cbrt())?))
}

/// Infimum of `λ₁` over cuboids of surface area `k`: `4π²/k` (not attained).
pub fn cuboid_surface_infimum(k: f64) -> Result<f64> {
    check_positive("k", k)?;
    Ok(4.0 * PI2 / k)
}

/// `λ₁(αΩ) = λ₁(Ω) / α²`.
pub fn scaling_law(lambda: Eigenvalue, alpha: f64) -> Result<Eigenvalue> {
    check_positive("alpha", alpha)?;
    Ok(Eigenvalue(lambda.0 / (alpha * alpha)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn cuboid_examples() {
        let cube = CuboidDims::cube(1.0).unwrap();
        assert!(rel(cuboid_lambda1(&cube).value(), 2.0 * PI2) < 1e-15);

        let l = 0.01_f64;
        let flat = CuboidDims::new(l.powf(-0.5), l.powf(-0.5), l).unwrap();
        assert!(rel(cuboid_lambda1(&flat).value(), 2.0 * PI2 * l) < 1e-12);

        let l = 0.1_f64;
        let needle = CuboidDims::new(l.powi(-2), l, l).unwrap();
        assert!(rel(cuboid_lambda1(&needle).value(), PI2 * (l.powi(4) + 1.0 / (l * l))) < 1e-12);
    }

    #[test]
    fn permutation_invariance() {
        let a = cuboid_lambda1(&CuboidDims::new(1.0, 2.0, 3.0).unwrap());
        let b = cuboid_lambda1(&CuboidDims::new(3.0, 1.0, 2.0).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn ball_examples() {
        let a = specfun::a11_prime();
        let r1 = ball_lambda1_radius(1.0).unwrap().value();
        assert!(rel(r1, a * a) < 1e-15);
        assert!((r1 - 7.528).abs() < 1e-3);
        assert!(rel(ball_lambda1_radius(2.0).unwrap().value(), r1 / 4.0) < 1e-15);
        assert!(rel(ball_lambda1_surface(4.0 * PI).unwrap().value(), r1) < 1e-14);
        assert!(rel(ball_lambda1_volume(4.0 * PI / 3.0).unwrap().value(), r1) < 1e-14);
        let v1 = ball_lambda1_volume(1.0).unwrap().value();
        assert!(rel(ball_lambda1_volume(8.0).unwrap().value(), v1 / 4.0) < 1e-14);
        let s1 = ball_lambda1_surface(1.0).unwrap().value();
        assert!(rel(ball_lambda1_surface(2.0).unwrap().value(), s1 / 2.0) < 1e-15);
    }

    #[test]
    fn cube_examples() {
        assert!(rel(cube_lambda1_surface(6.0).unwrap().value(), 2.0 * PI2) < 1e-14);
        assert!(rel(cube_lambda1_surface(2.0).unwrap().value(), 6.0 * PI2) < 1e-14);
        for k in [1.0, 2.0, 10.0] {
            assert!(rel(cube_lambda1_surface(k).unwrap().value(), 12.0 * PI2 / k) < 1e-14);
            let v = cube_lambda1_volume(k).unwrap().value();
            assert!(rel(v, 2.0 * PI2 / k.powf(2.0 / 3.0)) < 1e-14);
        }
    }

    #[test]
    fn orderings() {
        for k in [1.0, 2.0, 10.0] {
            let ball = ball_lambda1_surface(k).unwrap().value();
            assert!(cuboid_surface_infimum(k).unwrap() < ball);
            assert!(ball < cube_lambda1_surface(k).unwrap().value());
            assert!(ball_lambda1_volume(k).unwrap() < cube_lambda1_volume(k).unwrap());
        }
    }

    #[test]
    fn homogeneity() {
        for alpha in [0.5, 2.0, 10.0] {
            let c = CuboidDims::new(1.3, 0.7, 0.2).unwrap();
            let direct = cuboid_lambda1(&c.scaled(alpha).unwrap()).value();
            let scaled = scaling_law(cuboid_lambda1(&c), alpha).unwrap().value();
            assert!(rel(direct, scaled) < 1e-12);

            let direct = ball_lambda1_radius(alpha).unwrap().value();
            let scaled = scaling_law(ball_lambda1_radius(1.0).unwrap(), alpha).unwrap().value();
            assert!(rel(direct, scaled) < 1e-12);
        }
        let e = Eigenvalue::new(3.0).unwrap();
        assert_eq!(scaling_law(e, 1.0).unwrap(), e);
        assert!(scaling_law(e, 0.0).is_err());
        assert!(Eigenvalue::new(0.0).is_err());
    }
}
