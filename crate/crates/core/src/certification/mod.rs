//! Numerical checks of the quantitative estimates behind the construction.

pub mod compare;
pub mod decay;
pub mod harmonic_limit;
pub mod holder;
pub mod poly;
pub mod report;

pub use compare::{interpolant_comparison, l1_distance_check, scale_comparison, ComparisonMode, ComparisonTable, L1Check, LevelDiff};
pub use decay::{basic_decay_check, decay_fit, fit_power_law, tilt_excess_identity, BasicDecay, DecayFit, PowerFit, TiltIdentity};
pub use harmonic_limit::{harmonic_limit_check, BlowUp, HarmonicLimit};
pub use holder::{holder_seminorm, HolderEstimate};
pub use poly::{poly_constant_oracle, poly_derivative_bound, PolyBound};
pub use report::{CertRecord, CertReport, FitKind};
