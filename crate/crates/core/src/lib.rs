pub mod bits;
pub mod blending;
pub mod certification;
pub mod config;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod harness;
pub mod interpolation;
pub mod lipschitz;
pub mod quadrature;
pub mod scalar;
pub mod stencil;

pub use error::{Error, Result};
pub use scalar::Real;

/// Nodal field in double precision, the scalar used by the geometric pipeline.
pub type Grid = grid::GridFunction<f64>;
/// Single precision nodal field.
pub type Grid32 = grid::GridFunction<f32>;
