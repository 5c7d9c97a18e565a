//! Command-line driver: JSON experiment configs, figure presets and CSV output.

pub mod config;
pub mod output;
pub mod registry;
pub mod run;
