pub mod export;
pub mod pipeline;
pub mod surface;

pub use export::{export, ExportFormat};
pub use pipeline::{run_pipeline, Check, LevelStats, OutputPaths, PipelineOutput, PlaneChoice, RunConfig};
pub use surface::{generate_surface, sample_surface, SurfaceKind, SurfaceSpec};
