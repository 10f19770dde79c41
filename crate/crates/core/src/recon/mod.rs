//! Sphere sampling, recovery of droplet coefficients from samples, and
//! display meshes.

mod fit;
mod grid;
mod mesh;

pub use fit::{fit_coefficients, fit_sample_set, FitReport, MAX_CONDITION};
pub use grid::{equiangular_grid, gauss_legendre_grid, gauss_legendre_nodes, GridKind, SamplingGrid};
pub use mesh::{mesh, phase_color, DropletMesh, MeshSource};
