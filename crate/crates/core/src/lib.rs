//! First Maxwell (curl-curl) cavity eigenvalues on cuboids, balls and
//! cross-product domains `ω × (0, h)`.
//!
//! The crate bundles the closed-form cuboid and ball formulas, the
//! perimeter-constrained cuboid analysis, a P1 finite-element Laplacian
//! eigensolver for rectilinear base polygons, and the dumbbell product family
//! whose first eigenvalue decays to zero under a fixed surface area.

pub mod closed_form;
pub mod cuboid_search;
pub mod error;
pub mod fem2d;
pub mod geometry;
pub mod json;
pub mod maxwell_product;
pub mod specfun;
pub mod verify;

pub use closed_form::Eigenvalue;
pub use error::{Error, Result};
pub use geometry::{CuboidDims, DumbbellParams, ProductDomain, RectilinearPolygon, ScheduleParams};
