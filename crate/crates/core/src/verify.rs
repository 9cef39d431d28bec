//! Runtime invariant suite behind `cavity verify`.
//!
//! Every check records a measured quantity and the threshold it is held to.
//! Random sampling is driven by a single seeded ChaCha stream, so a given
//! seed always produces the same report.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::closed_form::{
    ball_lambda1_radius, ball_lambda1_surface, ball_lambda1_volume, cube_lambda1_surface,
    cube_lambda1_volume, cuboid_lambda1, scaling_law,
};
use crate::cuboid_search::{
    grid_infimum, lambda1_constrained, volume_family_blowup, volume_family_vanishing, FeasiblePoint,
    PerimeterConstraint,
};
use crate::error::Result;
use crate::fem2d::eigen::{angle_to_constants, dirichlet_eig1, neumann_eig1};
use crate::fem2d::mesh::{mesh_rectilinear, MeshOptions};
use crate::fem2d::{assemble, richardson_extrapolate};
use crate::geometry::{
    build_dumbbell, normalization_factor, normalized_surface_area, CuboidDims, DumbbellParams,
    RectilinearPolygon, ScheduleParams,
};
use crate::json::SCHEMA_VERSION;
use crate::maxwell_product::{
    dumbbell_run, product_lambda1, rectangle_eigenvalues, trial_bound, trial_bound_discrete,
};
use crate::specfun::{self, find_psi1_prime_zero, psi1_prime_series, psi1_series, SERIES_SWITCHOVER};

const PI2: f64 = PI * PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub module: String,
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema: u32,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> Result<String> {
        crate::json::to_string(self)
    }

    /// Plain-text pass/fail table.
    pub fn render_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<6} {:<16} {:<48} {:>12} {:>12}", "result", "module", "check", "measured", "threshold");
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{:<6} {:<16} {:<48} {:>12.4e} {:>12.4e}",
                if c.passed { "PASS" } else { "FAIL" },
                c.module,
                c.name,
                c.measured,
                c.threshold
            );
        }
        let failed = self.failures().count();
        let _ = writeln!(s, "{} checks, {} failed", self.checks.len(), failed);
        s
    }
}

struct Suite {
    rng: ChaCha8Rng,
    checks: Vec<Check>,
}

impl Suite {
    /// Passes when `measured < threshold`.
    fn below(&mut self, module: &str, name: &str, measured: f64, threshold: f64, detail: String) {
        self.push(module, name, measured < threshold, measured, threshold, detail);
    }

    fn push(&mut self, module: &str, name: &str, passed: bool, measured: f64, threshold: f64, detail: String) {
        self.checks.push(Check {
            module: module.into(),
            name: name.into(),
            passed: passed && measured.is_finite(),
            measured,
            threshold,
            detail,
        });
    }

    /// Records an evaluation error as a failed check.
    fn attempt(&mut self, module: &str, name: &str, f: impl FnOnce(&mut Self) -> Result<()>) {
        if let Err(e) = f(self) {
            self.push(module, name, false, f64::NAN, f64::NAN, format!("error: {e}"));
        }
    }

    fn dumbbell(&mut self) -> DumbbellParams {
        let d = self.rng.random_range(1e-4..0.99);
        let f = self.rng.random_range(1e-4..0.99);
        DumbbellParams::new(d, d * f).expect("sampled inside the valid range")
    }

    fn feasible(&mut self, k: f64) -> FeasiblePoint {
        let c = PerimeterConstraint::new(k).expect("positive k");
        let l3 = c.l3_max() * self.rng.random_range(1e-6..1.0);
        let (lo, hi) = c.l1_bounds(l3);
        let t: f64 = self.rng.random_range(0.0..=1.0);
        FeasiblePoint::new(lo + (hi - lo) * t, l3, k).expect("sampled inside the bounds")
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Runs every invariant check with the given seed.
pub fn run_suite(seed: u64) -> VerifyReport {
    let mut s = Suite { rng: ChaCha8Rng::seed_from_u64(seed), checks: Vec::new() };
    geometry_checks(&mut s);
    specfun_checks(&mut s);
    closed_form_checks(&mut s);
    cuboid_checks(&mut s);
    fem_checks(&mut s);
    product_checks(&mut s);
    let passed = s.checks.iter().all(|c| c.passed);
    VerifyReport { schema: SCHEMA_VERSION, seed, passed, checks: s.checks }
}

fn geometry_checks(s: &mut Suite) {
    let mut area_err = 0.0_f64;
    let mut valid = true;
    let mut hom = 0.0_f64;
    for _ in 0..200 {
        let p = s.dumbbell();
        let poly = build_dumbbell(&p);
        area_err = area_err
            .max((poly.area() - p.closed_form_area()).abs())
            .max((poly.perimeter() - p.closed_form_perimeter()).abs());
        valid &= poly.signed_area() > 0.0 && poly.first_self_intersection().is_none();
        let alpha = s.rng.random_range(1e-3..1e3);
        let scaled = poly.scale(alpha).expect("positive alpha");
        hom = hom
            .max(rel(scaled.area(), alpha * alpha * poly.area()))
            .max(rel(scaled.perimeter(), alpha * poly.perimeter()));
    }
    s.below("geometry", "dumbbell area/perimeter closed form", area_err, 1e-12, "200 random (delta, eta)".into());
    s.push("geometry", "dumbbell polygon simple and counterclockwise", valid, 0.0, 0.0, "200 random (delta, eta)".into());
    s.below("geometry", "scale homogeneity", hom, 1e-13, "relative, alpha in [1e-3, 1e3]".into());

    let mut resid = 0.0_f64;
    for d in [0.5, 0.1, 1e-2, 1e-4] {
        for f in [0.5, 1e-2, 1e-6] {
            for h in [1e-1, 1.0, 10.0, 1e4, 1e8] {
                let p = DumbbellParams::new(d, d * f).expect("valid grid point");
                let l = normalization_factor(&p, h).expect("positive h");
                resid = resid.max((normalized_surface_area(&p, h, l) - 1.0).abs());
            }
        }
    }
    s.below("geometry", "normalization surface residual", resid, 1e-12, "60-point (delta, eta, h) grid".into());
}

fn specfun_checks(s: &mut Suite) {
    s.attempt("specfun", "a'11 zero", |s| {
        let z = specfun::find_a11_prime()?;
        let ok = (2.7436..=2.7438).contains(&z.value) && z.residual < 1e-12;
        s.push("specfun", "a'11 in [2.7436, 2.7438]", ok, z.value, 2.7437, format!("residual {:e}", z.residual));
        let other = find_psi1_prime_zero(2.5, 2.9)?;
        s.below("specfun", "zero independent of bracket", (z.value - other.value).abs(), 1e-12, "[2,3] vs [2.5,2.9]".into());
        Ok(())
    });
    let z = SERIES_SWITCHOVER;
    let gap = (psi1_series(z) - (z.sin() / z - z.cos()))
        .abs()
        .max((psi1_prime_series(z) - (z.cos() / z - z.sin() / (z * z) + z.sin())).abs());
    s.below("specfun", "series/closed form agree at switchover", gap, 1e-12, format!("|z| = {z}"));
}

fn closed_form_checks(s: &mut Suite) {
    let mut perm_ok = true;
    let mut hom = 0.0_f64;
    for _ in 0..50 {
        let (a, b, c) = (s.rng.random_range(0.1..10.0), s.rng.random_range(0.1..10.0), s.rng.random_range(0.1..10.0));
        let sides = [[a, b, c], [b, c, a], [c, a, b], [b, a, c]];
        let vals: Vec<f64> = sides
            .iter()
            .map(|t| cuboid_lambda1(&CuboidDims::new(t[0], t[1], t[2]).expect("positive")).value())
            .collect();
        perm_ok &= vals.iter().all(|v| *v == vals[0]);
        for alpha in [0.5, 2.0, 10.0] {
            let cub = CuboidDims::new(a, b, c).expect("positive");
            let direct = cuboid_lambda1(&cub.scaled(alpha).expect("positive")).value();
            let law = scaling_law(cuboid_lambda1(&cub), alpha).expect("positive").value();
            hom = hom.max(rel(direct, law));
        }
    }
    for alpha in [0.5, 2.0, 10.0] {
        let r = s.rng.random_range(0.1..10.0);
        let direct = ball_lambda1_radius(alpha * r).expect("positive").value();
        let law = scaling_law(ball_lambda1_radius(r).expect("positive"), alpha).expect("positive").value();
        hom = hom.max(rel(direct, law));
    }
    s.push("closed_form", "cuboid permutation invariance", perm_ok, 0.0, 0.0, "50 random triples".into());
    s.below("closed_form", "scaling law homogeneity", hom, 1e-12, "alpha in {0.5, 2, 10}".into());

    let mut margin = f64::INFINITY;
    let mut vmargin = f64::INFINITY;
    for k in [1.0, 2.0, 10.0] {
        let ball = ball_lambda1_surface(k).expect("positive").value();
        let cube = cube_lambda1_surface(k).expect("positive").value();
        margin = margin.min(ball - 4.0 * PI2 / k).min(cube - ball);
        let vb = ball_lambda1_volume(k).expect("positive").value();
        let vc = cube_lambda1_volume(k).expect("positive").value();
        vmargin = vmargin.min(vc - vb);
    }
    s.push("closed_form", "4pi^2/k < ball < cube (surface k)", margin > 0.0, margin, 0.0, "k in {1, 2, 10}".into());
    s.push("closed_form", "ball < cube (volume k)", vmargin > 0.0, vmargin, 0.0, "k in {1, 2, 10}".into());
}

fn cuboid_checks(s: &mut Suite) {
    let mut margin = f64::INFINITY;
    for k in [1.0, 2.0, 10.0] {
        for _ in 0..10_000 {
            let p = s.feasible(k);
            margin = margin.min(lambda1_constrained(&p).value() - 4.0 * PI2 / k);
        }
    }
    s.push("cuboid_search", "strict lower bound 4pi^2/k", margin > 0.0, margin, 0.0, "1e4 points per k in {1, 2, 10}".into());

    let mut mismatches = 0usize;
    let k = 2.0;
    let c = PerimeterConstraint::new(k).expect("positive k");
    for i in 0..2000 {
        let l3 = s.rng.random_range(1e-4..1.5);
        let (lo, hi) = c.l1_bounds(l3);
        // include the exact bound values
        let l1 = match i % 10 {
            0 => lo,
            1 if l3 <= c.l3_max() => hi,
            _ => s.rng.random_range(1e-4..(k / (2.0 * l3))),
        };
        let l2 = (0.5 * k - l3 * l1) / (l3 + l1);
        let tol = 1e-12 * l1;
        let ordered = l3 <= l2 + tol && l2 <= l1 + tol;
        let feasible = FeasiblePoint::new(l1, l3, k).is_ok();
        if ordered != feasible {
            mismatches += 1;
        }
    }
    s.push(
        "cuboid_search",
        "feasibility bounds equal the order condition",
        mismatches == 0,
        mismatches as f64,
        0.0,
        "2000 samples incl. boundary points".into(),
    );

    s.attempt("cuboid_search", "volume families", |s| {
        let mut resid = 0.0_f64;
        for l in [1.0, 0.5, 0.1, 0.01, 1e-3] {
            resid = resid
                .max((volume_family_vanishing(l)?.0.volume() - 1.0).abs())
                .max((volume_family_blowup(l)?.0.volume() - 1.0).abs());
        }
        s.below("cuboid_search", "volume families have unit volume", resid, 1e-12, "l in {1, .5, .1, .01, .001}".into());
        Ok(())
    });

    s.attempt("cuboid_search", "grid refinement", |s| {
        let coarse = grid_infimum(2.0, 200)?;
        let fine = grid_infimum(2.0, 800)?;
        let ratio = fine.gap / coarse.gap;
        s.below("cuboid_search", "grid gap shrinks (r=800 vs r=200)", ratio, 0.5, format!("gaps {:e}, {:e}", coarse.gap, fine.gap));
        Ok(())
    });
}

fn fem_checks(s: &mut Suite) {
    s.attempt("fem2d", "conforming upper bound", |s| {
        let sq = RectilinearPolygon::unit_square();
        let mut min_gap = f64::INFINITY;
        let mut monotone = true;
        let mut prev = (f64::INFINITY, f64::INFINITY);
        let mut last_neumann = None;
        for n in [8.0, 16.0, 32.0] {
            let mesh = mesh_rectilinear(&sq, &MeshOptions::uniform(1.0 / n))?;
            let d = dirichlet_eig1(&mesh)?.lambda1();
            let nres = neumann_eig1(&mesh)?;
            let nm = nres.lambda1();
            min_gap = min_gap.min(d - 2.0 * PI2).min(nm - PI2);
            monotone &= d <= prev.0 && nm <= prev.1;
            prev = (d, nm);
            last_neumann = Some((mesh, nres));
        }
        s.push("fem2d", "square eigenvalues above analytic values", min_gap >= 0.0, min_gap, 0.0, "h = 1/8, 1/16, 1/32".into());
        s.push("fem2d", "square eigenvalues non-increasing", monotone, 0.0, 0.0, "nested refinement".into());

        let (mesh, nres) = last_neumann.expect("loop ran");
        let (_, m) = assemble(&mesh)?;
        let ones = vec![1.0; mesh.vertex_count()];
        let v = &nres.eigenvector;
        let proj = m.inner(&ones, v).abs() / m.inner(v, v).sqrt();
        s.below("fem2d", "Neumann vector M-orthogonal to constants", proj, 1e-10, format!("angle to constants {:.3}", angle_to_constants(&m, v)));
        Ok(())
    });

    s.attempt("fem2d", "dumbbell FEM", |s| {
        let p = DumbbellParams::new(0.25, 0.05)?;
        let poly = build_dumbbell(&p);
        let mut estimates = Vec::new();
        for layers in [2, 4] {
            let coarse = mesh_rectilinear(&poly, &MeshOptions::dumbbell(&p, 1.0 / 8.0, layers))?;
            let fine = coarse.refine()?;
            let ext = richardson_extrapolate(&neumann_eig1(&coarse)?, &neumann_eig1(&fine)?)?;
            estimates.push(ext);
        }
        let diff = (estimates[0].value.value() - estimates[1].value.value()).abs();
        let bar = estimates[0].error_bar.max(estimates[1].error_bar);
        s.below("fem2d", "channel layers 2 vs 4 within error bar", diff, bar, "dumbbell(0.25, 0.05), h = 1/8 and 1/16".into());

        let mut gap = f64::INFINITY;
        let rect = RectilinearPolygon::rectangle(0.0, 0.0, 2.0, 1.0)?;
        for (poly, opts) in [
            (RectilinearPolygon::unit_square(), MeshOptions::uniform(1.0 / 16.0)),
            (rect, MeshOptions::uniform(1.0 / 16.0)),
            (poly.clone(), MeshOptions::dumbbell(&p, 1.0 / 8.0, 2)),
        ] {
            let mesh = mesh_rectilinear(&poly, &opts)?;
            gap = gap.min(dirichlet_eig1(&mesh)?.lambda1() - neumann_eig1(&mesh)?.lambda1());
        }
        s.push("fem2d", "Dirichlet >= Neumann", gap >= 0.0, gap, 0.0, "square, 2x1 rectangle, dumbbell".into());
        Ok(())
    });
}

fn product_checks(s: &mut Suite) {
    s.attempt("maxwell_product", "dichotomy", |s| {
        let mut worst = 0.0_f64;
        for _ in 0..50 {
            let c = CuboidDims::new(
                s.rng.random_range(0.1..10.0),
                s.rng.random_range(0.1..10.0),
                s.rng.random_range(0.1..10.0),
            )?;
            let (d, n) = rectangle_eigenvalues(c.l1(), c.l2())?;
            let prod = product_lambda1(d, n, c.l3())?.lambda1.value();
            worst = worst.max(rel(prod, cuboid_lambda1(&c).value()));
        }
        s.below("maxwell_product", "dichotomy reproduces cuboid formula", worst, 1e-12, "50 random cuboids".into());
        Ok(())
    });

    s.attempt("maxwell_product", "trial bound decay", |s| {
        let mut ok = true;
        let mut last = 0.0;
        for beta in [0.5, 1.0, 2.0] {
            let mut prev = f64::INFINITY;
            for d in [0.5, 0.2, 0.1, 0.05, 0.01, 1e-3] {
                let p = DumbbellParams::new(d, d.powf(3.0 + beta))?;
                let r = trial_bound(&p).rayleigh;
                ok &= r > 0.0 && r < prev;
                prev = r;
                last = r;
            }
        }
        s.push("maxwell_product", "trial quotient positive and decreasing", ok, last, 0.0, "eta = delta^(3+beta)".into());
        Ok(())
    });

    s.attempt("maxwell_product", "trial discrete", |s| {
        let p = DumbbellParams::new(0.25, 0.05)?;
        let mesh = mesh_rectilinear(&build_dumbbell(&p), &MeshOptions::dumbbell(&p, 1.0 / 8.0, 2))?;
        let d = trial_bound_discrete(&p, &mesh)?;
        let exact = trial_bound(&p).rayleigh;
        s.below("maxwell_product", "trial quotient closed form vs assembled", rel(d, exact), 1e-10, "dumbbell(0.25, 0.05)".into());
        let fem = neumann_eig1(&mesh)?.lambda1();
        s.push("maxwell_product", "FEM Neumann <= discrete trial quotient", fem <= d, fem, d, "same mesh".into());
        Ok(())
    });

    s.attempt("maxwell_product", "scaling", |s| {
        let p = DumbbellParams::new(0.25, 0.05)?;
        let poly = build_dumbbell(&p);
        let opts = MeshOptions::dumbbell(&p, 1.0 / 8.0, 2);
        let base = neumann_eig1(&mesh_rectilinear(&poly, &opts)?)?.lambda1();
        let half = neumann_eig1(&mesh_rectilinear(&poly.scale(0.5)?, &opts.scaled(0.5))?)?.lambda1();
        s.below("maxwell_product", "Neumann eigenvalue scales as 1/L^2", rel(half, 4.0 * base), 1e-8, "L = 1 and 0.5".into());
        Ok(())
    });

    s.attempt("maxwell_product", "decay", |s| {
        let mut ok = true;
        let mut worst_ratio = 0.0_f64;
        let mut resid = 0.0_f64;
        for beta in [0.5, 1.0, 2.0] {
            let p_exp = 2.0 / beta + 1.0;
            let mut values = Vec::new();
            for h in [1e1, 1e2, 1e3, 1e4] {
                let run = dumbbell_run(&ScheduleParams::new(beta, h, p_exp)?, None)?;
                ok &= run.dirichlet_branch_inactive && run.schedule_satisfied;
                resid = resid.max(run.surface_residual.abs());
                values.push(run.lambda1_upper);
            }
            ok &= values.windows(2).all(|w| w[1] < w[0]);
            worst_ratio = worst_ratio.max(values[3] / values[0]);
        }
        s.push("maxwell_product", "lambda1 upper bound decreasing in h", ok, worst_ratio, 1.0, "beta in {0.5, 1, 2}, p = 2/beta + 1".into());
        s.below("maxwell_product", "normalized surface area residual", resid, 1e-12, "all runs".into());
        Ok(())
    });
}
