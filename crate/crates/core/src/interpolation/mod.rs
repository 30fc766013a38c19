pub mod harmonic;
pub mod mollify;
pub mod rotate;

pub use harmonic::{harmonic_extend, HarmonicExtension};
pub use mollify::mollify;
pub use rotate::{rotate_graph, rotation_l1_comparison, Lattice};
pub mod interpolant;
pub use interpolant::{interpolate, Interpolant, Provenance};
