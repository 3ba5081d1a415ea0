//! Config-driven experiment runner for the quantum van der Pol toolkit.
//!
//! * [`config`]: TOML configs with unit-suffixed keys, presets expanded.
//! * [`presets`]: built-in figure presets and their ratio self-test.
//! * [`runner`]: sweep execution on a worker pool with deterministic output.
//! * [`output`]: CSV tables and Wigner text files.
//! * [`tongue`]: Arnold-tongue grids and iso-contours.

pub mod config;
pub mod output;
pub mod presets;
pub mod runner;
pub mod tongue;

pub use config::{load_config, ConfigError, Engine, ExperimentConfig, InitialState, Mode, Scenario};
pub use output::{Observables, ResultRow, ResultTable};
pub use runner::{run, RunOutput};
pub use tongue::{arnold_tongue_summary, TongueGrid};
