//! First Maxwell eigenvalue of product domains `ω × (0, h)` and the dumbbell
//! family whose eigenvalue vanishes at fixed surface area.
//!
//! For a product domain `λ₁ = min{μ₁ᴰ(ω), μ₁ᴺ(ω) + π²/h²}`. On the dumbbell
//! `ω_{δ,η}` the function that is `c` on the large square, `−1/δ` on the small
//! one and linear across the channel has mean zero for
//! `c = (η + 2δ)/(ηδ + 2)`, and its Rayleigh quotient bounds `μ₁ᴺ` from
//! above by `O(η/δ³)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::closed_form::Eigenvalue;
use crate::error::{Error, Result};
use crate::fem2d::eigen::{dirichlet_eig1, neumann_eig1, richardson_extrapolate};
use crate::fem2d::mesh::{dof_cap_from_env, mesh_rectilinear, MeshOptions, TriMesh};
use crate::fem2d::assemble;
use crate::geometry::{
    build_dumbbell, check_positive, normalization_factor, normalized_surface_area, DumbbellParams,
    ScheduleParams,
};

const PI2: f64 = PI * PI;

/// First zero of the Bessel function `J₀`.
pub const BESSEL_J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductEigenvalue {
    pub lambda1: Eigenvalue,
    /// Active branch; ties report `Dirichlet`.
    pub branch: Branch,
}

/// `min{μ₁ᴰ, μ₁ᴺ + π²/h²}`.
pub fn product_lambda1(mu1_d: Eigenvalue, mu1_n: Eigenvalue, h: f64) -> Result<ProductEigenvalue> {
    check_positive("h", h)?;
    if mu1_d.value() < mu1_n.value() {
        return Err(Error::InvalidInput(format!(
            "Dirichlet eigenvalue {} below Neumann eigenvalue {}",
            mu1_d, mu1_n
        )));
    }
    let neumann = mu1_n.value() + PI2 / (h * h);
    Ok(if mu1_d.value() <= neumann {
        ProductEigenvalue { lambda1: mu1_d, branch: Branch::Dirichlet }
    } else {
        ProductEigenvalue { lambda1: Eigenvalue::from_raw(neumann), branch: Branch::Neumann }
    })
}

/// Analytic `(μ₁ᴰ, μ₁ᴺ)` of the rectangle `a × b`.
pub fn rectangle_eigenvalues(a: f64, b: f64) -> Result<(Eigenvalue, Eigenvalue)> {
    check_positive("a", a)?;
    check_positive("b", b)?;
    let long = a.max(b);
    Ok((
        Eigenvalue::new(PI2 * (1.0 / (a * a) + 1.0 / (b * b)))?,
        Eigenvalue::new(PI2 / (long * long))?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialFunctionReport {
    pub c: f64,
    /// `∫|∇u|²`.
    pub grad_energy: f64,
    /// `∫u²`.
    pub mass: f64,
    pub rayleigh: f64,
}

/// `c = (η + 2δ)/(ηδ + 2)`.
pub fn trial_constant(p: &DumbbellParams) -> f64 {
    let (d, e) = (p.delta(), p.eta());
    (e + 2.0 * d) / (e * d + 2.0)
}

/// The mean-zero trial function; it depends on `x` only.
pub fn trial_function(p: &DumbbellParams, x: f64) -> f64 {
    let d = p.delta();
    let c = trial_constant(p);
    if x <= 0.0 {
        c
    } else if x >= d {
        -1.0 / d
    } else {
        c - (1.0 / d) * (1.0 / d + c) * x
    }
}

/// `∫u = c − δ + ηδc/2 − η/2`, zero for the chosen `c`.
pub fn trial_mean(p: &DumbbellParams) -> f64 {
    let (d, e) = (p.delta(), p.eta());
    let c = trial_constant(p);
    c - d + 0.5 * e * d * c - 0.5 * e
}

/// Closed-form Rayleigh quotient of the trial function, an upper bound for
/// `μ₁ᴺ(ω_{δ,η})`.
pub fn trial_bound(p: &DumbbellParams) -> TrialFunctionReport {
    let (d, e) = (p.delta(), p.eta());
    let c = trial_constant(p);
    let grad_energy = (e / d) * (1.0 / d + c).powi(2);
    let mass = c * c + 1.0 + e / (3.0 * d) * (1.0 - c * d + c * c * d * d);
    TrialFunctionReport { c, grad_energy, mass, rayleigh: grad_energy / mass }
}

/// Discrete Rayleigh quotient of the interpolated trial function after the
/// `M`-weighted mean is removed. Bounds the P1 Neumann eigenvalue of the
/// same mesh from above.
pub fn trial_bound_discrete(p: &DumbbellParams, mesh: &TriMesh) -> Result<f64> {
    trial_bound_discrete_shifted(p, mesh, 0.0)
}

/// As [`trial_bound_discrete`] with a constant added before projection.
pub fn trial_bound_discrete_shifted(p: &DumbbellParams, mesh: &TriMesh, shift: f64) -> Result<f64> {
    for x in [0.0, p.delta()] {
        if !mesh.has_x_line(x) {
            return Err(Error::MisalignedMesh(x));
        }
    }
    let expected = p.closed_form_area();
    if (mesh.domain_area() - expected).abs() > 1e-9 * expected {
        return Err(Error::InvalidInput(format!(
            "mesh covers area {} but the dumbbell has area {expected}",
            mesh.domain_area()
        )));
    }
    let (k, m) = assemble(mesh)?;
    let mut u: Vec<f64> = mesh.vertices.iter().map(|v| trial_function(p, v[0]) + shift).collect();
    let ones = vec![1.0; u.len()];
    let mean = m.inner(&ones, &u) / m.inner(&ones, &ones);
    u.iter_mut().for_each(|v| *v -= mean);
    Ok(k.inner(&u, &u) / m.inner(&u, &u))
}

/// `δ = h^(−p)`, `η = δ^(3+β)`.
pub fn schedule(s: &ScheduleParams) -> Result<DumbbellParams> {
    let delta = s.h().powf(-s.delta_exponent());
    if !(delta < 1.0) {
        return Err(Error::InvalidInput(format!(
            "h = {} is too small for the schedule: delta = h^(-{}) = {delta} is not below 1",
            s.h(),
            s.delta_exponent()
        )));
    }
    let eta = delta.powf(3.0 + s.beta());
    DumbbellParams::new(delta, eta)
}

/// Faber–Krahn area bound `μ₁ᴰ(ω) ≥ π j₀² / |ω|`.
pub fn dirichlet_area_lower_bound(area: f64) -> f64 {
    PI * BESSEL_J0_FIRST_ZERO * BESSEL_J0_FIRST_ZERO / area
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FemOptions {
    /// Coarse-level target cell size; the fine level halves it.
    pub target_h: f64,
    pub channel_min_layers: usize,
    pub dof_cap: usize,
}

impl Default for FemOptions {
    fn default() -> Self {
        Self { target_h: 1.0 / 16.0, channel_min_layers: 2, dof_cap: dof_cap_from_env() }
    }
}

/// FEM eigenvalues of the unscaled dumbbell on a nested mesh pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumbbellFem {
    pub mu1n_coarse: f64,
    pub mu1n_fine: f64,
    pub mu1n_extrapolated: f64,
    pub mu1n_error_bar: f64,
    pub mu1d_fine: f64,
    pub mu1d_extrapolated: f64,
    /// Discrete trial quotient on the fine mesh.
    pub trial_discrete: f64,
    pub dof_fine: usize,
    pub mesh_size_fine: f64,
}

/// Runs the Neumann and Dirichlet solvers on a coarse mesh and its nested
/// refinement. Returns the fine mesh as well.
pub fn dumbbell_fem(p: &DumbbellParams, opts: &FemOptions) -> Result<(DumbbellFem, TriMesh)> {
    let poly = build_dumbbell(p);
    let mesh_opts = MeshOptions::dumbbell(p, opts.target_h, opts.channel_min_layers).with_dof_cap(opts.dof_cap);
    let coarse = mesh_rectilinear(&poly, &mesh_opts)?;
    if 4 * coarse.vertex_count() > opts.dof_cap {
        return Err(Error::DofBudgetExceeded { estimated: 4 * coarse.vertex_count(), cap: opts.dof_cap });
    }
    let fine = coarse.refine()?;
    let nc = neumann_eig1(&coarse)?;
    let nf = neumann_eig1(&fine)?;
    let dc = dirichlet_eig1(&coarse)?;
    let df = dirichlet_eig1(&fine)?;
    let n_ext = richardson_extrapolate(&nc, &nf)?;
    let d_ext = richardson_extrapolate(&dc, &df)?;
    let fem = DumbbellFem {
        mu1n_coarse: nc.lambda1(),
        mu1n_fine: nf.lambda1(),
        mu1n_extrapolated: n_ext.value.value(),
        mu1n_error_bar: n_ext.error_bar,
        mu1d_fine: df.lambda1(),
        mu1d_extrapolated: d_ext.value.value(),
        trial_discrete: trial_bound_discrete(p, &fine)?,
        dof_fine: nf.dof_count,
        mesh_size_fine: nf.mesh_size,
    };
    Ok((fem, fine))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Trial,
    Fem,
}

/// One point of the dumbbell family `Ω_h = L(h) ω_{δ(h),η(h)} × (0, h)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumbbellRun {
    pub h: f64,
    /// `None` when `(δ, η)` were fixed by hand instead of by the schedule.
    pub beta: Option<f64>,
    pub delta_exponent: Option<f64>,
    pub delta: f64,
    pub eta: f64,
    /// Scale factor `L(h)`.
    pub scale: f64,
    /// `|∂Ω_h| − 1`.
    pub surface_residual: f64,
    /// `η ≤ δ^(3+β)`; always false without a schedule.
    pub schedule_satisfied: bool,
    /// Trial-function bound for `μ₁ᴺ(ω_{δ,η})` before scaling.
    pub mu1n_bound: f64,
    pub fem: Option<DumbbellFem>,
    /// Why FEM was skipped, if it was requested.
    pub fem_skipped: Option<String>,
    /// Upper bound for `μ₁ᴺ(ω_h)`: the fine FEM value when available,
    /// otherwise the trial bound, divided by `L²`.
    pub mu1n_scaled: f64,
    pub lambda1_upper: f64,
    pub method: Method,
    /// `π j₀² / |ω_h|`, a lower bound for `μ₁ᴰ(ω_h)` by the Faber–Krahn
    /// inequality (an ingredient external to the product formula).
    pub dirichlet_lower_bound: f64,
    /// The Dirichlet branch of the product formula cannot be the minimum.
    pub dirichlet_branch_inactive: bool,
}

/// Evaluates the dumbbell family at one schedule point.
pub fn dumbbell_run(s: &ScheduleParams, fem: Option<&FemOptions>) -> Result<DumbbellRun> {
    let p = schedule(s)?;
    let mut run = dumbbell_run_with_params(&p, s.h(), fem)?;
    run.beta = Some(s.beta());
    run.delta_exponent = Some(s.delta_exponent());
    run.schedule_satisfied = p.eta() <= p.delta().powf(3.0 + s.beta()) * (1.0 + 1e-12);
    Ok(run)
}

/// Evaluates the product domain for fixed `(δ, η)` at height `h`.
pub fn dumbbell_run_with_params(p: &DumbbellParams, h: f64, fem: Option<&FemOptions>) -> Result<DumbbellRun> {
    let scale = normalization_factor(p, h)?;
    let surface_residual = normalized_surface_area(p, h, scale) - 1.0;
    let bound = trial_bound(p).rayleigh;
    let (fem_result, fem_skipped) = match fem {
        None => (None, None),
        Some(opts) => match dumbbell_fem(p, opts) {
            Ok((f, _)) => (Some(f), None),
            Err(e @ Error::DofBudgetExceeded { .. }) => (None, Some(e.to_string())),
            Err(e) => return Err(e),
        },
    };
    let (mu1n, method) = match &fem_result {
        Some(f) => (f.mu1n_fine.min(bound), Method::Fem),
        None => (bound, Method::Trial),
    };
    let l2 = scale * scale;
    let mu1n_scaled = mu1n / l2;
    let lambda1_upper = mu1n_scaled + PI2 / (h * h);
    let dirichlet_lower_bound = dirichlet_area_lower_bound(p.closed_form_area() * l2);
    let mut inactive = dirichlet_lower_bound >= lambda1_upper;
    if let Some(f) = &fem_result {
        inactive &= f.mu1d_extrapolated / l2 >= lambda1_upper;
    }
    Ok(DumbbellRun {
        h,
        beta: None,
        delta_exponent: None,
        delta: p.delta(),
        eta: p.eta(),
        scale,
        surface_residual,
        schedule_satisfied: false,
        mu1n_bound: bound,
        fem: fem_result,
        fem_skipped,
        mu1n_scaled,
        lambda1_upper,
        method,
        dirichlet_lower_bound,
        dirichlet_branch_inactive: inactive,
    })
}

/// The default logarithmic height grid `{10, 10², 10³, 10⁴}`.
pub fn default_h_grid() -> Vec<f64> {
    vec![1e1, 1e2, 1e3, 1e4]
}
