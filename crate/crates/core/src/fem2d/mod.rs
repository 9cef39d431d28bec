//! P1 finite elements for the Laplacian on rectilinear polygons.

pub mod assemble;
pub mod eigen;
pub mod mesh;
pub mod sparse;
pub mod vtk;

pub use assemble::assemble;
pub use eigen::{
    dirichlet_eig1, neumann_eig1, observed_order, richardson_extrapolate, EigenResult,
    Extrapolation, SolverOptions,
};
pub use mesh::{mesh_rectilinear, ChannelZone, MeshOptions, Region, TriMesh};
pub use sparse::{SkylineCholesky, SparseSymMatrix};
