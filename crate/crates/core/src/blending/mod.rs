//! Dyadic decomposition, partition of unity and the blended surface `h_k`.

pub mod blend;
pub mod dyadic;
pub mod partition;

pub use blend::{blend, blend_fields, derivatives_at, BlendedSurface};
pub use dyadic::{dyadic_grid, DyadicGrid};
pub use partition::{bump_partition, PartitionOfUnity};
