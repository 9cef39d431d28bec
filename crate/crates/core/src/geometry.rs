//! Domain families: cuboids, the planar dumbbell and its products with an
//! interval.
//!
//! Everything here is an immutable value type; lengths are dimensionless.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point2 = [f64; 2];

/// Side lengths of a rectangular box, always stored as `l1 >= l2 >= l3 > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CuboidDims {
    l1: f64,
    l2: f64,
    l3: f64,
}

impl CuboidDims {
    /// Builds a cuboid from sides given in any order.
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        let mut sides = [a, b, c];
        if sides.iter().any(|s| !s.is_finite() || *s <= 0.0) {
            return Err(Error::InvalidInput(format!(
                "cuboid sides must be positive and finite, got {sides:?}"
            )));
        }
        sides.sort_by(|x, y| y.total_cmp(x));
        Ok(Self { l1: sides[0], l2: sides[1], l3: sides[2] })
    }

    pub fn cube(side: f64) -> Result<Self> {
        Self::new(side, side, side)
    }

    pub fn l1(&self) -> f64 {
        self.l1
    }

    pub fn l2(&self) -> f64 {
        self.l2
    }

    pub fn l3(&self) -> f64 {
        self.l3
    }

    pub fn sides(&self) -> [f64; 3] {
        [self.l1, self.l2, self.l3]
    }

    pub fn volume(&self) -> f64 {
        self.l1 * self.l2 * self.l3
    }

    pub fn surface_area(&self) -> f64 {
        2.0 * (self.l1 * self.l2 + self.l1 * self.l3 + self.l2 * self.l3)
    }

    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        check_positive("alpha", alpha)?;
        Self::new(alpha * self.l1, alpha * self.l2, alpha * self.l3)
    }
}

/// Channel length `delta` and channel width `eta` of the planar dumbbell,
/// with `0 < eta < delta < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DumbbellParams {
    delta: f64,
    eta: f64,
}

impl DumbbellParams {
    pub fn new(delta: f64, eta: f64) -> Result<Self> {
        if !(delta.is_finite() && eta.is_finite()) || eta <= 0.0 || delta <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "dumbbell needs positive delta and eta, got delta = {delta}, eta = {eta}"
            )));
        }
        if delta >= 1.0 {
            return Err(Error::InvalidInput(format!("dumbbell needs delta < 1, got {delta}")));
        }
        if eta >= delta {
            return Err(Error::InvalidInput(format!(
                "dumbbell needs eta < delta, got delta = {delta}, eta = {eta}"
            )));
        }
        Ok(Self { delta, eta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `|ω| = 1 + δ(δ + η)`.
    pub fn closed_form_area(&self) -> f64 {
        1.0 + self.delta * (self.delta + self.eta)
    }

    /// `|∂ω| = 2(2 + 3δ − η)`.
    pub fn closed_form_perimeter(&self) -> f64 {
        2.0 * (2.0 + 3.0 * self.delta - self.eta)
    }

    /// The channel `[0, δ] × [0, η]` as `(x0, x1, y0, y1)`.
    pub fn channel(&self) -> [f64; 4] {
        [0.0, self.delta, 0.0, self.eta]
    }
}

/// Parameters of the power-law schedule `δ = h^(−p)`, `η = δ^(3+β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParams {
    beta: f64,
    h: f64,
    delta_exponent: f64,
}

impl ScheduleParams {
    /// Requires `beta > 0`, `h > 0` and `delta_exponent > 2 / beta`.
    pub fn new(beta: f64, h: f64, delta_exponent: f64) -> Result<Self> {
        check_positive("beta", beta)?;
        check_positive("h", h)?;
        if !delta_exponent.is_finite() || delta_exponent <= 2.0 / beta {
            return Err(Error::InvalidInput(format!(
                "delta exponent p must exceed 2/beta = {}, got {delta_exponent}",
                2.0 / beta
            )));
        }
        Ok(Self { beta, h, delta_exponent })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn delta_exponent(&self) -> f64 {
        self.delta_exponent
    }
}

/// Closed, simple, counterclockwise polygon with axis-aligned edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point2>", into = "Vec<Point2>")]
pub struct RectilinearPolygon {
    vertices: Vec<Point2>,
}

impl RectilinearPolygon {
    pub fn new(vertices: Vec<Point2>) -> Result<Self> {
        let n = vertices.len();
        if n < 4 {
            return Err(Error::InvalidPolygon(format!("need at least 4 vertices, got {n}")));
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPolygon("non-finite coordinate".into()));
        }
        let mut horizontal = Vec::with_capacity(n);
        for i in 0..n {
            let [a, b] = [vertices[i], vertices[(i + 1) % n]];
            let dx = b[0] - a[0];
            let dy = b[1] - a[1];
            match (dx == 0.0, dy == 0.0) {
                (true, true) => {
                    return Err(Error::InvalidPolygon(format!("edge {i} has zero length")))
                }
                (false, false) => {
                    return Err(Error::InvalidPolygon(format!("edge {i} is not axis-aligned")))
                }
                (true, false) => horizontal.push(false),
                (false, true) => horizontal.push(true),
            }
        }
        for i in 0..n {
            if horizontal[i] == horizontal[(i + 1) % n] {
                return Err(Error::InvalidPolygon(format!(
                    "edges {i} and {} are collinear",
                    (i + 1) % n
                )));
            }
        }
        let poly = Self { vertices };
        if poly.signed_area() <= 0.0 {
            return Err(Error::InvalidPolygon("vertices are not counterclockwise".into()));
        }
        if let Some((i, j)) = poly.first_self_intersection() {
            return Err(Error::InvalidPolygon(format!("edges {i} and {j} intersect")));
        }
        Ok(poly)
    }

    /// Axis-aligned rectangle `[x0, x0 + width] × [y0, y0 + height]`.
    pub fn rectangle(x0: f64, y0: f64, width: f64, height: f64) -> Result<Self> {
        check_positive("width", width)?;
        check_positive("height", height)?;
        Self::new(vec![
            [x0, y0],
            [x0 + width, y0],
            [x0 + width, y0 + height],
            [x0, y0 + height],
        ])
    }

    pub fn unit_square() -> Self {
        Self::rectangle(0.0, 0.0, 1.0, 1.0).expect("unit square is valid")
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Shoelace formula.
    pub fn signed_area(&self) -> f64 {
        0.5 * self.edges().map(|(a, b)| a[0] * b[1] - b[0] * a[1]).sum::<f64>()
    }

    pub fn area(&self) -> f64 {
        self.signed_area()
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| (b[0] - a[0]).abs() + (b[1] - a[1]).abs()).sum()
    }

    /// `(xmin, xmax, ymin, ymax)`.
    pub fn bounding_box(&self) -> [f64; 4] {
        let mut bb = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
        for v in &self.vertices {
            bb[0] = bb[0].min(v[0]);
            bb[1] = bb[1].max(v[0]);
            bb[2] = bb[2].min(v[1]);
            bb[3] = bb[3].max(v[1]);
        }
        bb
    }

    /// Even-odd ray casting. Points on the boundary give an unspecified answer.
    pub fn contains(&self, p: Point2) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
                if p[0] < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn scale(&self, alpha: f64) -> Result<Self> {
        check_positive("alpha", alpha)?;
        Ok(Self { vertices: self.vertices.iter().map(|v| [alpha * v[0], alpha * v[1]]).collect() })
    }

    /// First pair of non-adjacent edges that touch, if any.
    pub fn first_self_intersection(&self) -> Option<(usize, usize)> {
        let n = self.vertices.len();
        let edges: Vec<_> = self.edges().collect();
        for i in 0..n {
            for j in (i + 2)..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                if segments_touch(edges[i], edges[j]) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.vertices).expect("points serialize")
    }
}

impl TryFrom<Vec<Point2>> for RectilinearPolygon {
    type Error = Error;

    fn try_from(v: Vec<Point2>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<RectilinearPolygon> for Vec<Point2> {
    fn from(p: RectilinearPolygon) -> Self {
        p.vertices
    }
}

// Closed axis-aligned segments intersect iff their bounding boxes overlap.
fn segments_touch(s: (Point2, Point2), t: (Point2, Point2)) -> bool {
    let span = |a: f64, b: f64| (a.min(b), a.max(b));
    let (sx0, sx1) = span(s.0[0], s.1[0]);
    let (sy0, sy1) = span(s.0[1], s.1[1]);
    let (tx0, tx1) = span(t.0[0], t.1[0]);
    let (ty0, ty1) = span(t.0[1], t.1[1]);
    sx0 <= tx1 && tx0 <= sx1 && sy0 <= ty1 && ty0 <= sy1
}

/// `ω × (0, height)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductDomain {
    base: RectilinearPolygon,
    height: f64,
}

impl ProductDomain {
    pub fn new(base: RectilinearPolygon, height: f64) -> Result<Self> {
        check_positive("height", height)?;
        Ok(Self { base, height })
    }

    pub fn base(&self) -> &RectilinearPolygon {
        &self.base
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn volume(&self) -> f64 {
        self.base.area() * self.height
    }
}

/// `|∂(ω × (0,h))| = 2|ω| + h|∂ω|`.
pub fn product_surface_area(d: &ProductDomain) -> f64 {
    2.0 * d.base.area() + d.height * d.base.perimeter()
}

/// The 12-vertex dumbbell `G ∪ S ∪ G_δ`: the unit square
/// `G = (−1,0) × ((−1+η)/2, (1+η)/2)`, the channel `S = [0,δ] × (0,η)` and the
/// square `G_δ = (δ,2δ) × ((−δ+η)/2, (δ+η)/2)`.
///
/// The loop starts at the lower-left corner of `G` and runs counterclockwise.
pub fn build_dumbbell(p: &DumbbellParams) -> RectilinearPolygon {
    let (d, e) = (p.delta, p.eta);
    let g_lo = (-1.0 + e) / 2.0;
    let g_hi = (1.0 + e) / 2.0;
    let s_lo = (-d + e) / 2.0;
    let s_hi = (d + e) / 2.0;
    let vertices = vec![
        [-1.0, g_lo],
        [0.0, g_lo],
        [0.0, 0.0],
        [d, 0.0],
        [d, s_lo],
        [2.0 * d, s_lo],
        [2.0 * d, s_hi],
        [d, s_hi],
        [d, e],
        [0.0, e],
        [0.0, g_hi],
        [-1.0, g_hi],
    ];
    RectilinearPolygon::new(vertices).expect("valid parameters give a valid dumbbell")
}

/// Scale factor `L` with `|∂(L·ω_{δ,η} × (0,h))| = 1`, i.e. the positive root
/// of `B L² + 2 A L − 1 = 0` written as `1 / (√(A² + B) + A)`.
pub fn normalization_factor(p: &DumbbellParams, h: f64) -> Result<f64> {
    check_positive("h", h)?;
    let a = h * (2.0 + 3.0 * p.delta - p.eta);
    let b = 2.0 * (1.0 + p.delta * (p.delta + p.eta));
    Ok(1.0 / ((a * a + b).sqrt() + a))
}

/// `2L²(1+δ(δ+η)) + 2hL(2+3δ−η)`, the closed-form surface area of the
/// normalized product domain.
pub fn normalized_surface_area(p: &DumbbellParams, h: f64, l: f64) -> f64 {
    2.0 * l * l * p.closed_form_area() + h * l * p.closed_form_perimeter()
}

pub(crate) fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be positive and finite, got {v}")))
    }
}
