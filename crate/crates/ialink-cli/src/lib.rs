//! Configuration, presets, sweeps and CSV output for the ialink simulator.
//! The `ialink` binary is a thin dispatcher over these modules.

pub mod align;
pub mod config;
pub mod sweep;

pub use align::{AlignReport, align_check};
pub use config::{ConfigError, CsiEntry, PresetName, ScenarioConfig, preset};
pub use sweep::{CSV_HEADER, SweepError, SweepOutput, run_sweep};
