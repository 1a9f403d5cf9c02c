//! Piecewise-linear finite elements on simplicial meshes of the unit box.

mod assembly;
mod interp;
mod mesh;
mod qoi;
mod solver;

pub use assembly::{assemble, element_coefficient, Assembler, CentroidInterpolator, FESystem, Pattern};
pub use interp::{multilinear_interpolate, Stencil};
pub use mesh::{structured_mesh, Domain, ElementGeometry, Mesh};
pub use qoi::{qoi_average, BoxRegion};
pub use solver::{solve, solve_free, RESIDUAL_TOL};
