//! Lowest eigenpairs of `K x = λ M x` by shift-invert subspace iteration
//! with Rayleigh–Ritz projection.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::closed_form::Eigenvalue;
use crate::error::{Error, Result};
use crate::fem2d::assemble::assemble;
use crate::fem2d::mesh::TriMesh;
use crate::fem2d::sparse::{SkylineCholesky, SparseSymMatrix};

/// Angle below which a Neumann eigenvector counts as the constant mode.
pub const ZERO_MODE_ANGLE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub block_size: usize,
    /// Number of lowest pairs that must converge.
    pub nev: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { block_size: 4, nev: 2, tol: 1e-10, max_iter: 2000, seed: 0x5eed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    /// Ascending converged eigenvalues.
    pub eigenvalues: Vec<f64>,
    /// `‖Kx − λMx‖ / ‖x‖_M` per pair.
    pub residuals: Vec<f64>,
    /// Largest triangle diameter.
    pub mesh_size: f64,
    pub dof_count: usize,
    pub iterations: usize,
    /// First eigenvector on all mesh vertices (zero on the boundary for
    /// Dirichlet problems).
    #[serde(skip)]
    pub eigenvector: Vec<f64>,
}

impl EigenResult {
    pub fn lambda1(&self) -> f64 {
        self.eigenvalues[0]
    }
}

struct Pairs {
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    residuals: Vec<f64>,
    iterations: usize,
}

fn m_dot(m: &SparseSymMatrix, x: &[f64], y: &[f64]) -> f64 {
    m.inner(x, y)
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Removes the `M`-projection onto `c` from `y`, where `cm = M c`.
fn project_out(y: &mut [f64], c: &[f64], cm: &[f64], cmc: f64) {
    let coef = dot(cm, y) / cmc;
    axpy(-coef, c, y);
}

/// Two passes of modified Gram–Schmidt in the `M` inner product. Columns
/// that vanish are replaced by a fresh random vector.
fn m_orthonormalize(
    m: &SparseSymMatrix,
    cols: &mut [Vec<f64>],
    deflate: Option<(&[f64], &[f64], f64)>,
    rng: &mut ChaCha8Rng,
) {
    for j in 0..cols.len() {
        let mut attempts = 0;
        loop {
            let norm0 = m_dot(m, &cols[j], &cols[j]).sqrt();
            for _ in 0..2 {
                if let Some((c, cm, cmc)) = deflate {
                    project_out(&mut cols[j], c, cm, cmc);
                }
                for i in 0..j {
                    let (head, tail) = cols.split_at_mut(j);
                    let r = m_dot(m, &head[i], &tail[0]);
                    axpy(-r, &head[i], &mut tail[0]);
                }
            }
            let norm = m_dot(m, &cols[j], &cols[j]).sqrt();
            if norm > 1e-10 * norm0 && norm > 0.0 {
                cols[j].iter_mut().for_each(|v| *v /= norm);
                break;
            }
            attempts += 1;
            assert!(attempts < 10, "cannot extend the M-orthonormal basis");
            cols[j] = (0..m.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        }
    }
}

fn subspace_iteration(
    k: &SparseSymMatrix,
    m: &SparseSymMatrix,
    shift: f64,
    deflate: Option<&[f64]>,
    opts: &SolverOptions,
) -> Result<Pairs> {
    let n = k.dim();
    let block = opts.block_size.max(opts.nev + 1).min(n);
    let nev = opts.nev.min(block);
    let op = k.add_scaled(shift, m);
    let chol = SkylineCholesky::factor(&op)?;

    let deflation = deflate.map(|c| {
        let cm = m.matvec(c);
        let cmc = dot(&cm, c);
        (c.to_vec(), cm, cmc)
    });
    let deflate_ref = deflation.as_ref().map(|(c, cm, cmc)| (c.as_slice(), cm.as_slice(), *cmc));

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<Vec<f64>> =
        (0..block).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    m_orthonormalize(m, &mut x, deflate_ref, &mut rng);

    let mut last_residual = f64::INFINITY;
    for iter in 1..=opts.max_iter {
        let mut y: Vec<Vec<f64>> = x
            .iter()
            .map(|xi| {
                let mut v = m.matvec(xi);
                chol.solve_in_place(&mut v);
                v
            })
            .collect();
        m_orthonormalize(m, &mut y, deflate_ref, &mut rng);

        let ky: Vec<Vec<f64>> = y.iter().map(|v| k.matvec(v)).collect();
        let h = DMatrix::from_fn(block, block, |i, j| 0.5 * (dot(&y[i], &ky[j]) + dot(&y[j], &ky[i])));
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..block).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        let mut values = Vec::with_capacity(block);
        let mut vectors = Vec::with_capacity(block);
        for &col in &order {
            let mut v = vec![0.0; n];
            for (i, yi) in y.iter().enumerate() {
                axpy(eig.eigenvectors[(i, col)], yi, &mut v);
            }
            values.push(eig.eigenvalues[col]);
            vectors.push(v);
        }
        let residuals: Vec<f64> = values
            .iter()
            .zip(&vectors)
            .take(nev)
            .map(|(&lam, v)| {
                let mut r = k.matvec(v);
                axpy(-lam, &m.matvec(v), &mut r);
                dot(&r, &r).sqrt() / m_dot(m, v, v).sqrt()
            })
            .collect();
        last_residual = residuals.iter().copied().fold(0.0, f64::max);
        x = vectors;
        if last_residual < opts.tol {
            return Ok(Pairs {
                values: values[..nev].to_vec(),
                vectors: x.into_iter().take(nev).collect(),
                residuals,
                iterations: iter,
            });
        }
    }
    Err(Error::NoConvergence { iterations: opts.max_iter, residual: last_residual })
}

/// Angle in the `M` inner product between `v` and the constant vector.
pub fn angle_to_constants(m: &SparseSymMatrix, v: &[f64]) -> f64 {
    let ones = vec![1.0; v.len()];
    let c = m_dot(m, &ones, v).abs() / (m_dot(m, &ones, &ones) * m_dot(m, v, v)).sqrt();
    c.min(1.0).acos()
}

/// Classification of a Neumann eigenvector as the kernel: by direction only,
/// never by eigenvalue magnitude.
pub fn is_constant_mode(m: &SparseSymMatrix, v: &[f64]) -> bool {
    angle_to_constants(m, v) < ZERO_MODE_ANGLE
}

/// First Dirichlet eigenvalue, on the interior vertices, shift 0.
pub fn dirichlet_eig1(mesh: &TriMesh) -> Result<EigenResult> {
    dirichlet_eig1_with(mesh, &SolverOptions::default())
}

pub fn dirichlet_eig1_with(mesh: &TriMesh, opts: &SolverOptions) -> Result<EigenResult> {
    let (k, m) = assemble(mesh)?;
    let interior: Vec<usize> = (0..mesh.vertex_count()).filter(|&i| !mesh.boundary[i]).collect();
    if interior.is_empty() {
        return Err(Error::InvalidInput("mesh has no interior vertex".into()));
    }
    let kr = k.restrict(&interior);
    let mr = m.restrict(&interior);
    let pairs = subspace_iteration(&kr, &mr, 0.0, None, opts)?;
    let mut eigenvector = vec![0.0; mesh.vertex_count()];
    for (&g, &v) in interior.iter().zip(&pairs.vectors[0]) {
        eigenvector[g] = v;
    }
    Ok(EigenResult {
        eigenvalues: pairs.values,
        residuals: pairs.residuals,
        mesh_size: mesh.mesh_size(),
        dof_count: interior.len(),
        iterations: pairs.iterations,
        eigenvector,
    })
}

/// First positive Neumann eigenvalue. The constant kernel is deflated by
/// `M`-orthogonal projection inside a shift-invert iteration at `−1/|ω|`.
pub fn neumann_eig1(mesh: &TriMesh) -> Result<EigenResult> {
    neumann_eig1_with(mesh, &SolverOptions::default())
}

pub fn neumann_eig1_with(mesh: &TriMesh, opts: &SolverOptions) -> Result<EigenResult> {
    let (k, m) = assemble(mesh)?;
    neumann_from_matrices(&k, &m, mesh.domain_area(), mesh.mesh_size(), opts)
}

pub(crate) fn neumann_from_matrices(
    k: &SparseSymMatrix,
    m: &SparseSymMatrix,
    area: f64,
    mesh_size: f64,
    opts: &SolverOptions,
) -> Result<EigenResult> {
    let n = k.dim();
    if n < 2 {
        return Err(Error::InvalidInput("mesh needs at least two vertices".into()));
    }
    let ones = vec![1.0; n];
    let pairs = subspace_iteration(k, m, 1.0 / area, Some(&ones), opts)?;
    if let Some(i) = pairs.vectors.iter().position(|v| is_constant_mode(m, v)) {
        return Err(Error::NoConvergence {
            iterations: pairs.iterations,
            residual: angle_to_constants(m, &pairs.vectors[i]),
        });
    }
    Ok(EigenResult {
        eigenvalues: pairs.values,
        residuals: pairs.residuals,
        mesh_size,
        dof_count: n,
        iterations: pairs.iterations,
        eigenvector: pairs.vectors.into_iter().next().expect("nev >= 1"),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub value: Eigenvalue,
    /// `|coarse − fine|`, a conservative bound on the fine-mesh error for
    /// any convergence order of at least one.
    pub error_bar: f64,
}

/// `(4·fine − coarse) / 3` for a nested pair with `h_fine = h_coarse / 2`.
/// Identical inputs are accepted and return their common value.
pub fn richardson_extrapolate(coarse: &EigenResult, fine: &EigenResult) -> Result<Extrapolation> {
    let ratio = coarse.mesh_size / fine.mesh_size;
    let identical = coarse == fine;
    if !identical && (ratio - 2.0).abs() > 1e-9 {
        return Err(Error::MismatchedMeshes(format!(
            "mesh sizes {} and {} are not in ratio 2",
            coarse.mesh_size, fine.mesh_size
        )));
    }
    if !identical && fine.dof_count <= coarse.dof_count {
        return Err(Error::MismatchedMeshes("fine mesh has no more unknowns than the coarse one".into()));
    }
    let (c, f) = (coarse.lambda1(), fine.lambda1());
    Ok(Extrapolation { value: Eigenvalue::new((4.0 * f - c) / 3.0)?, error_bar: (c - f).abs() })
}

/// Observed order `log₂((λ_h − λ_{h/2}) / (λ_{h/2} − λ_{h/4}))` from three
/// nested levels.
pub fn observed_order(coarse: f64, mid: f64, fine: f64) -> f64 {
    ((coarse - mid) / (mid - fine)).log2()
}
