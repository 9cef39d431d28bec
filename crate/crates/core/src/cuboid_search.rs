//! Cuboids under a surface-area constraint `2(ℓ₁ℓ₂ + ℓ₁ℓ₃ + ℓ₂ℓ₃) = k`,
//! plus the degenerate volume-one families.
//!
//! With `ℓ₂` eliminated, a cuboid is the pair `(ℓ₁, ℓ₃)`, and the ordering
//! `ℓ₁ ≥ ℓ₂ ≥ ℓ₃` becomes
//! `√(ℓ₃² + k/2) − ℓ₃ ≤ ℓ₁ ≤ (k/2 − ℓ₃²)/(2ℓ₃)` with `0 < ℓ₃ ≤ √(k/6)`.
//! The infimum `4π²/k` of `λ₁` sits on the degenerate edge `ℓ₃ → 0`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::{cuboid_lambda1, Eigenvalue};
use crate::error::{Error, Result};
use crate::geometry::{check_positive, CuboidDims};

const PI2: f64 = PI * PI;

/// Relative slack on the feasibility bounds so that boundary points computed
/// in floating point (the cube, the lower `ℓ₁` bound) are accepted.
const BOUND_SLACK: f64 = 1e-12;

/// `ℓ₃` floor of [`grid_infimum`] at the reference resolution 200, as a
/// fraction of `√(k/6)`. It shrinks like `1/resolution`.
pub const GRID_FLOOR_AT_200: f64 = 1e-3;

/// Hard floor on the relative `ℓ₃` grid floor.
const GRID_FLOOR_MIN: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerimeterConstraint {
    k: f64,
}

impl PerimeterConstraint {
    pub fn new(k: f64) -> Result<Self> {
        check_positive("k", k)?;
        Ok(Self { k })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Largest admissible `ℓ₃`, reached by the cube.
    pub fn l3_max(&self) -> f64 {
        (self.k / 6.0).sqrt()
    }

    /// `[√(ℓ₃² + k/2) − ℓ₃, (k/2 − ℓ₃²)/(2ℓ₃)]`.
    pub fn l1_bounds(&self, l3: f64) -> (f64, f64) {
        let half = 0.5 * self.k;
        ((l3 * l3 + half).sqrt() - l3, (half - l3 * l3) / (2.0 * l3))
    }
}

/// A pair `(ℓ₁, ℓ₃)` inside the feasible region for surface area `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasiblePoint {
    l1: f64,
    l3: f64,
    k: f64,
}

impl FeasiblePoint {
    pub fn new(l1: f64, l3: f64, k: f64) -> Result<Self> {
        let c = PerimeterConstraint::new(k)?;
        let fail = |bound: String| Error::Infeasible { k, l1, l3, bound };
        if !(l1.is_finite() && l3.is_finite()) {
            return Err(fail("lengths must be finite".into()));
        }
        if l3 <= 0.0 {
            return Err(fail("l3 must be positive".into()));
        }
        if l3 > c.l3_max() * (1.0 + BOUND_SLACK) {
            return Err(fail(format!("l3 exceeds sqrt(k/6) = {}", c.l3_max())));
        }
        let (lo, hi) = c.l1_bounds(l3);
        if l1 < lo * (1.0 - BOUND_SLACK) {
            return Err(fail(format!(
                "l1 below lower bound sqrt(l3^2 + k/2) - l3 = {lo} (would give l2 > l1)"
            )));
        }
        if l1 > hi * (1.0 + BOUND_SLACK) {
            return Err(fail(format!(
                "l1 above upper bound (k/2 - l3^2)/(2 l3) = {hi} (would give l2 < l3)"
            )));
        }
        Ok(Self { l1, l3, k })
    }

    pub fn l1(&self) -> f64 {
        self.l1
    }

    pub fn l3(&self) -> f64 {
        self.l3
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// The completed cuboid `(ℓ₁, ℓ₂, ℓ₃)`.
    pub fn triple(&self) -> CuboidDims {
        CuboidDims::new(self.l1, ell2_from_constraint(self), self.l3)
            .expect("feasible points have positive sides")
    }
}

/// `ℓ₂ = (k/2 − ℓ₃ℓ₁)/(ℓ₃ + ℓ₁)`.
pub fn ell2_from_constraint(p: &FeasiblePoint) -> f64 {
    (0.5 * p.k - p.l3 * p.l1) / (p.l3 + p.l1)
}

/// `π²(1/ℓ₁² + (ℓ₃+ℓ₁)²/(k/2 − ℓ₃ℓ₁)²)`.
pub fn lambda1_constrained(p: &FeasiblePoint) -> Eigenvalue {
    let d = 0.5 * p.k - p.l3 * p.l1;
    let s = p.l3 + p.l1;
    Eigenvalue::from_raw(PI2 * (1.0 / (p.l1 * p.l1) + s * s / (d * d)))
}

/// The Young-inequality lower bound `2π²(ℓ₃+ℓ₁)/(ℓ₁(k/2 − ℓ₃ℓ₁))`, which
/// itself exceeds `4π²/k`.
pub fn young_lower_bound(p: &FeasiblePoint) -> f64 {
    2.0 * PI2 * (p.l3 + p.l1) / (p.l1 * (0.5 * p.k - p.l3 * p.l1))
}

/// Member of the minimizing sequence: `ℓ₁` on its lower bound, where the
/// cross-section `ℓ₁ × ℓ₂` is a square.
pub fn minimizing_sequence(k: f64, l3: f64) -> Result<(FeasiblePoint, Eigenvalue)> {
    let c = PerimeterConstraint::new(k)?;
    check_positive("l3", l3)?;
    let (lo, _) = c.l1_bounds(l3);
    let p = FeasiblePoint::new(lo, l3, k)?;
    Ok((p, lambda1_constrained(&p)))
}

/// `π²(1/ℓ₁² + 4ℓ₁²/k²)`, the `ℓ₃ → 0` limit of `λ₁` at fixed `ℓ₁`; equals
/// `4π²/k` at `ℓ₁ = √(k/2)`.
pub fn degenerate_limit(k: f64, l1: f64) -> f64 {
    PI2 * (1.0 / (l1 * l1) + 4.0 * l1 * l1 / (k * k))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub point: FeasiblePoint,
    pub lambda1: Eigenvalue,
    /// `4π²/k`.
    pub infimum: f64,
    /// `lambda1 − infimum`.
    pub gap: f64,
    pub l3_floor: f64,
    pub evaluations: usize,
}

/// `ℓ₃` values of the sweep: `resolution` log-spaced points from the floor up
/// to `√(k/6)`.
pub fn l3_grid(k: f64, resolution: usize) -> Vec<f64> {
    let top = (k / 6.0).sqrt();
    let rel_floor = (GRID_FLOOR_AT_200 * 200.0 / resolution as f64).max(GRID_FLOOR_MIN);
    let (a, b) = ((top * rel_floor).ln(), top.ln());
    (0..resolution)
        .map(|i| {
            if i + 1 == resolution {
                top
            } else {
                (a + (b - a) * i as f64 / (resolution - 1) as f64).exp()
            }
        })
        .collect()
}

/// Every grid point of the sweep, row-major in `ℓ₃` then `ℓ₁`.
pub fn sweep_points(k: f64, resolution: usize) -> Result<Vec<FeasiblePoint>> {
    let c = PerimeterConstraint::new(k)?;
    if resolution < 10 {
        return Err(Error::InvalidInput(format!("resolution must be at least 10, got {resolution}")));
    }
    let mut points = Vec::with_capacity(resolution * resolution);
    for l3 in l3_grid(k, resolution) {
        let (lo, hi) = c.l1_bounds(l3);
        let hi = hi.max(lo);
        for j in 0..resolution {
            let l1 = if j + 1 == resolution {
                hi
            } else {
                lo + (hi - lo) * j as f64 / (resolution - 1) as f64
            };
            points.push(FeasiblePoint::new(l1, l3, k)?);
        }
    }
    Ok(points)
}

/// Minimum of `λ₁` over the sweep grid. Ties go to the smallest `ℓ₃`, then the
/// smallest `ℓ₁`.
pub fn grid_infimum(k: f64, resolution: usize) -> Result<GridResult> {
    let points = sweep_points(k, resolution)?;
    let values: Vec<f64> = points.par_iter().map(|p| lambda1_constrained(p).value()).collect();
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        let (p, q) = (&points[i], &points[best]);
        let better = v < values[best]
            || (v == values[best] && (p.l3, p.l1) < (q.l3, q.l1));
        if better {
            best = i;
        }
    }
    let infimum = 4.0 * PI2 / k;
    Ok(GridResult {
        point: points[best],
        lambda1: Eigenvalue::from_raw(values[best]),
        infimum,
        gap: values[best] - infimum,
        l3_floor: l3_grid(k, resolution)[0],
        evaluations: points.len(),
    })
}

/// Volume-one flat cuboid `(ℓ^(−1/2), ℓ^(−1/2), ℓ)` with `λ₁ = 2π²ℓ`.
pub fn volume_family_vanishing(l: f64) -> Result<(CuboidDims, Eigenvalue)> {
    check_unit_interval(l)?;
    let side = 1.0 / l.sqrt();
    let c = CuboidDims::new(side, side, l)?;
    Ok((c, cuboid_lambda1(&c)))
}

/// Volume-one needle `(ℓ^(−2), ℓ, ℓ)` with `λ₁ = π²(ℓ⁴ + 1/ℓ²)`.
pub fn volume_family_blowup(l: f64) -> Result<(CuboidDims, Eigenvalue)> {
    check_unit_interval(l)?;
    let c = CuboidDims::new(1.0 / (l * l), l, l)?;
    Ok((c, cuboid_lambda1(&c)))
}

/// Needle `((1−ℓ²)/(2ℓ), ℓ, ℓ)` of surface area 2, rescaled by `√(k/2)` to
/// surface area `k`. The parameter `ℓ` ranges over `(0, 1/√3]`.
pub fn perimeter_family_blowup(l: f64, k: f64) -> Result<(CuboidDims, Eigenvalue)> {
    check_positive("k", k)?;
    let top = 1.0 / 3.0_f64.sqrt();
    if !(l.is_finite() && l > 0.0 && l <= top * (1.0 + BOUND_SLACK)) {
        return Err(Error::InvalidInput(format!("l must lie in (0, 1/sqrt(3)], got {l}")));
    }
    let alpha = (0.5 * k).sqrt();
    let l1 = ((1.0 - l * l) / (2.0 * l)).max(l);
    let c = CuboidDims::new(alpha * l1, alpha * l, alpha * l)?;
    Ok((c, cuboid_lambda1(&c)))
}

/// `π²(4ℓ²/(1−ℓ²)² + 1/ℓ²)`, the surface-area-2 needle eigenvalue.
pub fn perimeter_blowup_formula(l: f64) -> f64 {
    PI2 * (4.0 * l * l / (1.0 - l * l).powi(2) + 1.0 / (l * l))
}

fn check_unit_interval(l: f64) -> Result<()> {
    if l.is_finite() && l > 0.0 && l <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("l must lie in (0, 1], got {l}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn cube_point() {
        let s = 1.0 / 3.0_f64.sqrt();
        let p = FeasiblePoint::new(s, s, 2.0).unwrap();
        assert!(rel(ell2_from_constraint(&p), s) < 1e-14);
        assert!(rel(lambda1_constrained(&p).value(), 6.0 * PI2) < 1e-12);
    }

    #[test]
    fn constraint_residual() {
        let l3 = 0.01;
        let l1 = 1.0001_f64.sqrt() - 0.01;
        let p = FeasiblePoint::new(l1, l3, 2.0).unwrap();
        let l2 = ell2_from_constraint(&p);
        assert!((2.0 * (l1 * l2 + l1 * l3 + l2 * l3) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_points_name_the_bound() {
        let (_, hi) = PerimeterConstraint::new(2.0).unwrap().l1_bounds(0.1);
        let err = FeasiblePoint::new(hi * 1.01, 0.1, 2.0).unwrap_err();
        assert!(err.to_string().contains("upper bound"), "{err}");
        let err = FeasiblePoint::new(0.5, 0.1, 2.0).unwrap_err();
        assert!(err.to_string().contains("lower bound"), "{err}");
        let err = FeasiblePoint::new(0.7, 0.7, 2.0).unwrap_err();
        assert!(err.to_string().contains("sqrt(k/6)"), "{err}");
    }

    #[test]
    fn minimizing_sequence_examples() {
        let target = 2.0 * PI2;
        let (p, lam) = minimizing_sequence(2.0, 0.01).unwrap();
        assert!(rel(lam.value(), target) < 0.03);
        assert!(rel(ell2_from_constraint(&p), p.l1()) < 1e-12);
        let (_, coarse) = minimizing_sequence(2.0, 0.1).unwrap();
        assert!(coarse.value() > lam.value() && lam.value() > target);
        assert!(rel(degenerate_limit(2.0, 1.0), target) < 1e-15);
        let (_, tiny) = minimizing_sequence(2.0, 1e-9).unwrap();
        assert!(rel(tiny.value(), target) < 1e-8);
        assert!(minimizing_sequence(2.0, 1.0).is_err());
    }

    #[test]
    fn grid_infimum_examples() {
        let g = grid_infimum(2.0, 200).unwrap();
        assert!(g.lambda1.value() > 2.0 * PI2);
        assert!(g.lambda1.value() < 1.05 * 2.0 * PI2);
        let g2 = grid_infimum(2.0, 400).unwrap();
        assert!(g2.lambda1.value() <= g.lambda1.value());
        let g8 = grid_infimum(2.0, 800).unwrap();
        assert!(g8.gap < 0.5 * g.gap);
        assert!(grid_infimum(2.0, 5).is_err());
    }

    #[test]
    fn volume_families() {
        let (c, lam) = volume_family_vanishing(1.0).unwrap();
        assert_eq!(c.sides(), [1.0, 1.0, 1.0]);
        assert!(rel(lam.value(), 2.0 * PI2) < 1e-15);
        let mut prev = f64::INFINITY;
        for l in [1.0, 0.5, 0.1, 0.01] {
            let (c, lam) = volume_family_vanishing(l).unwrap();
            assert!((c.volume() - 1.0).abs() < 1e-12);
            assert!(rel(lam.value(), 2.0 * PI2 * l) < 1e-12);
            assert!(lam.value() < prev);
            prev = lam.value();
        }
        let (_, lam) = volume_family_blowup(1.0).unwrap();
        assert!(rel(lam.value(), 2.0 * PI2) < 1e-15);
        let (c, lam) = volume_family_blowup(0.1).unwrap();
        assert!((c.volume() - 1.0).abs() < 1e-12);
        assert!(rel(lam.value(), PI2 * (1e-4 + 100.0)) < 1e-12);
        assert!(volume_family_blowup(0.01).unwrap().1 > lam);
        assert!(volume_family_vanishing(0.0).is_err());
        assert!(volume_family_blowup(1.5).is_err());
    }

    #[test]
    fn perimeter_family() {
        for l in [0.1, 0.3, 1.0 / 3.0_f64.sqrt()] {
            let (c, lam) = perimeter_family_blowup(l, 2.0).unwrap();
            assert!((c.surface_area() - 2.0).abs() < 1e-12);
            assert!(rel(lam.value(), perimeter_blowup_formula(l)) < 1e-12);
        }
        let (c, lam) = perimeter_family_blowup(1.0 / 3.0_f64.sqrt(), 2.0).unwrap();
        assert!(rel(c.l1(), c.l3()) < 1e-12);
        assert!(rel(lam.value(), 6.0 * PI2) < 1e-12);
        assert!(perimeter_family_blowup(0.01, 2.0).unwrap().1.value() > 1e4);
        let (c, lam) = perimeter_family_blowup(0.1, 8.0).unwrap();
        assert!((c.surface_area() - 8.0).abs() < 1e-12);
        assert!(rel(lam.value(), perimeter_blowup_formula(0.1) / 4.0) < 1e-12);
        assert!(perimeter_family_blowup(0.6, 2.0).is_err());
    }

    fn feasible(k: f64) -> impl Strategy<Value = FeasiblePoint> {
        (0.0..1.0_f64, 0.0..=1.0_f64).prop_map(move |(s, t)| {
            let c = PerimeterConstraint::new(k).unwrap();
            let l3 = c.l3_max() * (1e-6 + (1.0 - 1e-6) * s);
            let (lo, hi) = c.l1_bounds(l3);
            FeasiblePoint::new(lo + (hi - lo).max(0.0) * t, l3, k).unwrap()
        })
    }

    proptest! {
        #[test]
        fn two_routes_agree(p in feasible(2.0)) {
            let a = lambda1_constrained(&p).value();
            let b = cuboid_lambda1(&p.triple()).value();
            prop_assert!(rel(a, b) < 1e-12);
        }

        #[test]
        fn strict_young_bound(p in prop_oneof![feasible(1.0), feasible(2.0), feasible(10.0)]) {
            let lam = lambda1_constrained(&p).value();
            prop_assert!(lam >= young_lower_bound(&p) * (1.0 - 1e-14));
            prop_assert!(lam > 4.0 * PI2 / p.k());
        }

        #[test]
        fn bounds_are_the_order_condition(l3 in 1e-4..2.0_f64, t in 0.0..1.0_f64) {
            // sample l1 with l2 > 0, i.e. l1 < k / (2 l3)
            let k = 2.0;
            let l1 = t * k / (2.0 * l3);
            prop_assume!(l1 > 0.0);
            let l2 = (0.5 * k - l3 * l1) / (l3 + l1);
            let ordered = l3 <= l2 && l2 <= l1;
            let c = PerimeterConstraint::new(k).unwrap();
            let (lo, hi) = c.l1_bounds(l3);
            let strictly_inside = l3 < c.l3_max() && lo < l1 && l1 < hi;
            let outside = l3 > c.l3_max() || l1 < lo || l1 > hi;
            if strictly_inside {
                prop_assert!(ordered);
                prop_assert!(FeasiblePoint::new(l1, l3, k).is_ok());
            }
            if outside {
                prop_assert!(!ordered || (l2 - l1).abs() < 1e-9 || (l2 - l3).abs() < 1e-9);
            }
        }
    }
}
