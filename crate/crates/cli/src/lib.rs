//! Parameter sweeps over the open Tavis-Cummings model, written as CSV.

pub mod config;
pub mod output;
pub mod sweep;

pub use config::{parse_config, parse_config_text, CliArgs, ConfigError, Method, SweepSpec};
pub use output::{format_g, write_csv, HEADER};
pub use sweep::{evaluate_point, run_sweep, Row, Values};
