use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A polygon failed validation.
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    /// `(l1, l3)` lies outside the perimeter-constrained feasible region.
    #[error("infeasible cuboid point (k = {k}, l1 = {l1}, l3 = {l3}): {bound}")]
    Infeasible { k: f64, l1: f64, l3: f64, bound: String },

    #[error("mesh would need about {estimated} vertices, above the cap of {cap}; use the trial-function bound instead")]
    DofBudgetExceeded { estimated: usize, cap: usize },

    #[error("degenerate triangle {index} (area {area:e})")]
    DegenerateTriangle { index: usize, area: f64 },

    #[error("mesh is not aligned to x = {0}")]
    MisalignedMesh(f64),

    #[error("mismatched meshes: {0}")]
    MismatchedMeshes(String),

    #[error("factorization failed at pivot {pivot} (value {value:e})")]
    Factorization { pivot: usize, value: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("root bracket [{lo}, {hi}] does not change sign")]
    Bracket { lo: f64, hi: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of a numerical algorithm, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Factorization { .. } | Error::NoConvergence { .. } | Error::Bracket { .. }
        )
    }
}
