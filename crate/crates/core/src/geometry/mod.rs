pub mod current;
pub mod excess;
pub mod frame;
pub mod multivector;
pub mod region;
pub mod variation;

pub use current::{Defect, SampledCurrent};
pub use excess::{cylindrical_excess, is_admissible, region_moments, spherical_excess, tangent_plane, ExcessReport};
pub use frame::Frame;
pub use region::{Region, RegionKind};
pub use variation::{first_variation_residual, VariationResidual};
