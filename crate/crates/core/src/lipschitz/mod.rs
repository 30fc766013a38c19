pub mod approx;
pub mod bv;
pub mod extend;
pub mod maximal;

pub use approx::{approximate, ApproxStats, LipApprox};
pub use bv::{bv_slice_check, BvCheck};
pub use extend::{lipschitz_extend, measured_lipschitz};
pub use maximal::{dyadic_ladder, good_set, maximal_excess, GoodSet, MaximalField};
