//! Seeded experiment driver: JSON configs and built-in presets in, CSV/JSON
//! tables and a run manifest out.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod presets;

pub use commands::run;
pub use config::{Budgets, ExperimentConfig, ModeSpec, SValue, ShapeKindSpec, ShapeSpec};
pub use error::{CliError, EXIT_INTERNAL, EXIT_INVALID, EXIT_OK};
pub use manifest::{OutputDir, RunManifest};
pub use presets::{preset, PRESET_NAMES};
