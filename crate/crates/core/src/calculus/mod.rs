//! Cell-centered finite differences on rectangles with homogeneous Neumann
//! boundary handling.

mod field;
mod grid;
mod ops;
pub mod snapshot;

pub use snapshot::{read_snapshot, write_snapshot};

pub use field::{ScalarField, VectorField};
pub use grid::{Corners, Grid, MIN_CELLS};
pub(crate) use ops::{div_into, grad_slice, neg_laplacian_diagonal, neg_laplacian_into};
pub use ops::{dirichlet_sq, div, grad, inner_faces, inner_h, laplacian_neumann, norm_h, norm_h2, norm_v};
