//! Batch runner for threshold sweeps, recipes and cross-validation reports.

pub mod config;
pub mod error;
pub mod recipe;
pub mod sweep;
pub mod validate;

pub use config::{parse_config, Family, Param, PartialConfig, SweepConfig};
pub use error::CliError;
pub use recipe::{load_recipe, run_recipe, Recipe, RunOptions};
pub use sweep::{run_sweep, SweepRow, CSV_COLUMNS, CSV_HEADER};
pub use validate::{run_validation, Check, ValidateOptions};
