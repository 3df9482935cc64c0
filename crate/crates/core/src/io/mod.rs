//! Configuration files, built-in examples and output artifacts.

pub mod builtin;
mod config;
mod manifest;
mod trajectory;

pub use config::{parse_config, Config, NoiseConfig, Parsed, SimulationConfig, CONFIG_VERSION};
pub use manifest::{sidecar_path, RunManifest};
pub use trajectory::{format_float, write_trajectory, write_trajectory_csv};
