// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod calculus;
pub mod error;
pub mod lagrange;
pub mod mat3;
pub mod noether;
pub mod presets;
pub mod relabel;
pub mod solver;
pub mod thermo;

pub use error::{Error, Result};
pub use solver::{MhdState, Tendency};
pub use thermo::{EquationOfState, Eos};
