//! Structured, geometry-aligned triangulation of rectilinear polygons.
//!
//! The grid lines include every vertex coordinate of the polygon, so each grid
//! cell lies entirely inside or outside it. Cells are bisected until they meet
//! the size targets, then balanced so neighbouring cells differ by at most a
//! factor of two, which grades the grid geometrically away from the channel.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{check_positive, DumbbellParams, Point2, RectilinearPolygon};

/// Default vertex cap; overridable through [`DOF_CAP_ENV`].
pub const DEFAULT_DOF_CAP: usize = 2_000_000;

pub const DOF_CAP_ENV: &str = "CAVITY_DOF_CAP";

/// The cap from the environment, or [`DEFAULT_DOF_CAP`].
pub fn dof_cap_from_env() -> usize {
    std::env::var(DOF_CAP_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_DOF_CAP)
}

/// Label of the region a triangle belongs to. For the dumbbell, `Left` is the
/// unit square `G` and `Right` is the small square `G_δ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    Left,
    Channel,
    Right,
    Other,
}

impl Region {
    pub fn code(self) -> u8 {
        match self {
            Region::Left => 0,
            Region::Channel => 1,
            Region::Right => 2,
            Region::Other => 3,
        }
    }
}

/// Axis-aligned box `[x0, x1] × [y0, y1]` that must be resolved with at
/// least `layers` cells across its narrow side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelZone {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl ChannelZone {
    pub fn from_dumbbell(p: &DumbbellParams) -> Self {
        let [x0, x1, y0, y1] = p.channel();
        Self { x0, x1, y0, y1 }
    }

    fn scaled(&self, alpha: f64) -> Self {
        Self { x0: alpha * self.x0, x1: alpha * self.x1, y0: alpha * self.y0, y1: alpha * self.y1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshOptions {
    /// Largest admissible cell side.
    pub target_h: f64,
    /// Minimum number of cells across the channel width.
    pub channel_min_layers: usize,
    pub channel: Option<ChannelZone>,
    pub dof_cap: usize,
}

impl MeshOptions {
    pub fn uniform(target_h: f64) -> Self {
        Self { target_h, channel_min_layers: 2, channel: None, dof_cap: DEFAULT_DOF_CAP }
    }

    pub fn dumbbell(p: &DumbbellParams, target_h: f64, channel_min_layers: usize) -> Self {
        Self {
            target_h,
            channel_min_layers,
            channel: Some(ChannelZone::from_dumbbell(p)),
            dof_cap: DEFAULT_DOF_CAP,
        }
    }

    pub fn with_dof_cap(mut self, cap: usize) -> Self {
        self.dof_cap = cap;
        self
    }

    /// Options for the polygon scaled by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            target_h: self.target_h * alpha,
            channel: self.channel.map(|c| c.scaled(alpha)),
            ..*self
        }
    }

    fn validate(&self) -> Result<()> {
        check_positive("target_h", self.target_h)?;
        if self.channel_min_layers < 2 {
            return Err(Error::InvalidInput(format!(
                "channel_min_layers must be at least 2, got {}",
                self.channel_min_layers
            )));
        }
        if let Some(c) = self.channel {
            if !(c.x1 > c.x0 && c.y1 > c.y0) {
                return Err(Error::InvalidInput(format!("empty channel zone {c:?}")));
            }
        }
        Ok(())
    }
}

/// P1 triangulation. Triangles are counterclockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Point2>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<bool>,
    pub regions: Vec<Region>,
    xs: Vec<f64>,
    ys: Vec<f64>,
    inside: Vec<bool>,
    channel: Option<ChannelZone>,
    domain_area: f64,
}

impl TriMesh {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn interior_count(&self) -> usize {
        self.boundary.iter().filter(|b| !**b).count()
    }

    /// x-coordinates of the grid lines.
    pub fn grid_x(&self) -> &[f64] {
        &self.xs
    }

    pub fn grid_y(&self) -> &[f64] {
        &self.ys
    }

    /// Area of the meshed polygon.
    pub fn domain_area(&self) -> f64 {
        self.domain_area
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn triangle_diameter(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        let d = |p: Point2, q: Point2| (p[0] - q[0]).hypot(p[1] - q[1]);
        d(a, b).max(d(b, c)).max(d(c, a))
    }

    /// Largest triangle diameter.
    pub fn mesh_size(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_diameter(t)).fold(0.0, f64::max)
    }

    pub fn has_x_line(&self, x: f64) -> bool {
        let tol = 1e-12 * (1.0 + x.abs());
        self.xs.iter().any(|g| (g - x).abs() <= tol)
    }

    /// Nested refinement: every cell is split into four.
    pub fn refine(&self) -> Result<TriMesh> {
        let xs = bisect_all(&self.xs);
        let ys = bisect_all(&self.ys);
        let estimate = xs.len() * ys.len();
        let cap = DEFAULT_DOF_CAP.max(self.vertex_count() * 5);
        if estimate > cap {
            return Err(Error::DofBudgetExceeded { estimated: estimate, cap });
        }
        let nx = self.xs.len() - 1;
        let fine_nx = xs.len() - 1;
        let mut inside = vec![false; fine_nx * (ys.len() - 1)];
        for (j, row) in inside.chunks_mut(fine_nx).enumerate() {
            for (i, cell) in row.iter_mut().enumerate() {
                *cell = self.inside[(j / 2) * nx + i / 2];
            }
        }
        Ok(build(xs, ys, inside, self.channel, self.domain_area))
    }
}

/// Meshes `poly` on a grid aligned with all of its vertex coordinates.
pub fn mesh_rectilinear(poly: &RectilinearPolygon, opts: &MeshOptions) -> Result<TriMesh> {
    opts.validate()?;
    let mut bx: Vec<f64> = poly.vertices().iter().map(|v| v[0]).collect();
    let mut by: Vec<f64> = poly.vertices().iter().map(|v| v[1]).collect();
    let (zx, zy, fine) = match opts.channel {
        Some(c) => {
            bx.extend([c.x0, c.x1]);
            by.extend([c.y0, c.y1]);
            let width = (c.x1 - c.x0).min(c.y1 - c.y0);
            (Some((c.x0, c.x1)), Some((c.y0, c.y1)), width / opts.channel_min_layers as f64)
        }
        None => (None, None, opts.target_h),
    };
    let xs = graded_lines(bx, opts.target_h, zx, fine, opts.dof_cap)?;
    let ys = graded_lines(by, opts.target_h, zy, fine, opts.dof_cap)?;
    let estimate = xs.len() * ys.len();
    if estimate > opts.dof_cap {
        return Err(Error::DofBudgetExceeded { estimated: estimate, cap: opts.dof_cap });
    }
    let nx = xs.len() - 1;
    let ny = ys.len() - 1;
    let mut inside = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let c = [0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])];
            inside.push(poly.contains(c));
        }
    }
    Ok(build(xs, ys, inside, opts.channel, poly.area()))
}

/// Sorted, deduplicated breakpoints refined by bisection until every cell is
/// at most `target_h`, cells meeting the zone are at most `fine`, and
/// neighbouring cells differ by at most a factor of two.
fn graded_lines(
    mut breaks: Vec<f64>,
    target_h: f64,
    zone: Option<(f64, f64)>,
    fine: f64,
    cap: usize,
) -> Result<Vec<f64>> {
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let span = breaks[breaks.len() - 1] - breaks[0];
    let zone_len = zone.map_or(0.0, |(a, b)| b - a);
    let estimate = (span / target_h + 2.0 * zone_len / fine) as usize;
    if estimate > cap {
        return Err(Error::DofBudgetExceeded { estimated: estimate, cap });
    }

    let limit = |a: f64, b: f64| -> f64 {
        match zone {
            Some((z0, z1)) if a < z1 && b > z0 => target_h.min(fine),
            _ => target_h,
        }
    };
    let mut lines = vec![breaks[0]];
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let n = split_count(b - a, limit(a, b));
        for i in 1..=n {
            lines.push(if i == n { b } else { a + (b - a) * i as f64 / n as f64 });
        }
    }

    // 2:1 balance
    loop {
        let mut changed = false;
        let mut out = Vec::with_capacity(lines.len() * 2);
        out.push(lines[0]);
        for i in 0..lines.len() - 1 {
            let len = lines[i + 1] - lines[i];
            let left = if i > 0 { lines[i] - lines[i - 1] } else { f64::INFINITY };
            let right = if i + 2 < lines.len() { lines[i + 2] - lines[i + 1] } else { f64::INFINITY };
            if len > 2.0 * left.min(right) * (1.0 + 1e-12) {
                out.push(0.5 * (lines[i] + lines[i + 1]));
                changed = true;
            }
            out.push(lines[i + 1]);
        }
        lines = out;
        if lines.len() > cap {
            return Err(Error::DofBudgetExceeded { estimated: lines.len(), cap });
        }
        if !changed {
            return Ok(lines);
        }
    }
}

// Smallest power of two n with len / n <= limit.
fn split_count(len: f64, limit: f64) -> usize {
    let mut n = 1usize;
    while len / n as f64 > limit * (1.0 + 1e-12) {
        n *= 2;
    }
    n
}

fn bisect_all(lines: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * lines.len());
    for w in lines.windows(2) {
        out.push(w[0]);
        out.push(0.5 * (w[0] + w[1]));
    }
    out.push(lines[lines.len() - 1]);
    out
}

fn build(
    xs: Vec<f64>,
    ys: Vec<f64>,
    inside: Vec<bool>,
    channel: Option<ChannelZone>,
    domain_area: f64,
) -> TriMesh {
    let nx = xs.len() - 1;
    let ny = ys.len() - 1;
    let cell_in = |i: isize, j: isize| -> bool {
        i >= 0 && j >= 0 && (i as usize) < nx && (j as usize) < ny && inside[j as usize * nx + i as usize]
    };

    // Number along the longer axis in the outer loop so the band stays narrow.
    let x_outer = nx >= ny;
    let (outer, inner) = if x_outer { (nx + 1, ny + 1) } else { (ny + 1, nx + 1) };
    let mut index = vec![usize::MAX; (nx + 1) * (ny + 1)];
    let mut vertices = Vec::new();
    let mut boundary = Vec::new();
    for o in 0..outer {
        for n in 0..inner {
            let (i, j) = if x_outer { (o, n) } else { (n, o) };
            let (ii, jj) = (i as isize, j as isize);
            let around = [cell_in(ii - 1, jj - 1), cell_in(ii, jj - 1), cell_in(ii - 1, jj), cell_in(ii, jj)];
            if around.iter().any(|&c| c) {
                index[j * (nx + 1) + i] = vertices.len();
                vertices.push([xs[i], ys[j]]);
                boundary.push(!around.iter().all(|&c| c));
            }
        }
    }

    let mut triangles = Vec::new();
    let mut regions = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if !inside[j * nx + i] {
                continue;
            }
            let v = |di: usize, dj: usize| index[(j + dj) * (nx + 1) + i + di];
            let (v00, v10, v11, v01) = (v(0, 0), v(1, 0), v(1, 1), v(0, 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
            let cx = 0.5 * (xs[i] + xs[i + 1]);
            let region = match channel {
                None => Region::Other,
                Some(c) if cx < c.x0 => Region::Left,
                Some(c) if cx > c.x1 => Region::Right,
                Some(_) => Region::Channel,
            };
            regions.push(region);
            regions.push(region);
        }
    }

    TriMesh { vertices, triangles, boundary, regions, xs, ys, inside, channel, domain_area }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_dumbbell;
    use std::collections::HashMap;

    #[test]
    fn unit_square_half() {
        let m = mesh_rectilinear(&RectilinearPolygon::unit_square(), &MeshOptions::uniform(0.5)).unwrap();
        assert_eq!(m.vertex_count(), 9);
        assert_eq!(m.triangle_count(), 8);
        assert_eq!(m.interior_count(), 1);
        assert!(m.regions.iter().all(|r| *r == Region::Other));
    }

    #[test]
    fn triangles_positive_and_area_sums() {
        let p = DumbbellParams::new(0.25, 0.05).unwrap();
        let poly = build_dumbbell(&p);
        let m = mesh_rectilinear(&poly, &MeshOptions::dumbbell(&p, 0.125, 2)).unwrap();
        let mut total = 0.0;
        for t in 0..m.triangle_count() {
            let a = m.triangle_area(t);
            assert!(a > 0.0);
            total += a;
        }
        assert!((total - poly.area()).abs() < 1e-12);
    }

    #[test]
    fn channel_resolution() {
        let p = DumbbellParams::new(0.25, 0.05).unwrap();
        let m = mesh_rectilinear(&build_dumbbell(&p), &MeshOptions::dumbbell(&p, 0.125, 2)).unwrap();
        let bound = 0.05 / 2.0 * 2f64.sqrt() * (1.0 + 1e-12);
        let mut channel = 0;
        for t in 0..m.triangle_count() {
            if m.regions[t] == Region::Channel {
                channel += 1;
                assert!(m.triangle_diameter(t) <= bound);
            }
        }
        assert!(channel > 0);
        assert!(m.has_x_line(0.0) && m.has_x_line(0.25));
    }

    #[test]
    fn grading_ratio() {
        let p = DumbbellParams::new(0.25, 0.01).unwrap();
        let m = mesh_rectilinear(&build_dumbbell(&p), &MeshOptions::dumbbell(&p, 0.1, 2)).unwrap();
        for lines in [m.grid_x(), m.grid_y()] {
            for w in lines.windows(3) {
                let (a, b) = (w[1] - w[0], w[2] - w[1]);
                assert!(a.max(b) <= 2.0 * a.min(b) * (1.0 + 1e-9));
            }
            for w in lines.windows(2) {
                assert!(w[1] - w[0] <= 0.1 * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn refinement_halves_diameter() {
        let sq = RectilinearPolygon::unit_square();
        let a = mesh_rectilinear(&sq, &MeshOptions::uniform(1.0 / 8.0)).unwrap();
        let b = mesh_rectilinear(&sq, &MeshOptions::uniform(1.0 / 16.0)).unwrap();
        assert!((a.mesh_size() / b.mesh_size() - 2.0).abs() < 1e-12);
        let r = a.refine().unwrap();
        assert_eq!(r, b);
    }

    #[test]
    fn conforming_and_boundary_flags() {
        let p = DumbbellParams::new(0.3, 0.1).unwrap();
        let poly = build_dumbbell(&p);
        let m = mesh_rectilinear(&poly, &MeshOptions::dumbbell(&p, 0.2, 2)).unwrap();
        // every interior edge is shared by exactly two triangles, boundary edges by one
        let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &m.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        for (&(a, b), &count) in &edges {
            assert!(count == 1 || count == 2);
            if count == 1 {
                assert!(m.boundary[a] && m.boundary[b]);
            }
        }
        // boundary flags match polygon edges
        for (v, &flag) in m.vertices.iter().zip(&m.boundary) {
            let on_edge = poly.edges().any(|(a, b)| {
                let (x0, x1) = (a[0].min(b[0]), a[0].max(b[0]));
                let (y0, y1) = (a[1].min(b[1]), a[1].max(b[1]));
                v[0] >= x0 && v[0] <= x1 && v[1] >= y0 && v[1] <= y1
            });
            assert_eq!(flag, on_edge, "vertex {v:?}");
        }
    }

    #[test]
    fn dof_cap_rejects_thin_channels() {
        let p = DumbbellParams::new(1e-3, 1e-12).unwrap();
        let err = mesh_rectilinear(&build_dumbbell(&p), &MeshOptions::dumbbell(&p, 0.1, 2)).unwrap_err();
        assert!(matches!(err, Error::DofBudgetExceeded { .. }));
        let p = DumbbellParams::new(0.25, 0.05).unwrap();
        let opts = MeshOptions::dumbbell(&p, 0.1, 2).with_dof_cap(100);
        assert!(mesh_rectilinear(&build_dumbbell(&p), &opts).is_err());
    }

    #[test]
    fn rejects_bad_options() {
        let sq = RectilinearPolygon::unit_square();
        let mut o = MeshOptions::uniform(0.1);
        o.channel_min_layers = 1;
        assert!(mesh_rectilinear(&sq, &o).is_err());
        assert!(mesh_rectilinear(&sq, &MeshOptions::uniform(0.0)).is_err());
    }
}
