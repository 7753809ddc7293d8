//! Grids, fields, centered-difference operators and interpolation.

mod affine;
mod field;
mod grid;
pub mod interp;
pub mod stencil;

pub use affine::AffineField;
pub use field::{scalar_from_index_fn, vector_from_index_fn, ScalarField, TensorField, VectorField};
pub use grid::Grid;
pub use interp::{interpolate, Kernel, Stencil};
pub use stencil::{
    advective, apply_diff, curl, div, grad, gradient_tensor, partial, tensor_div, DiffKind, Field,
};
