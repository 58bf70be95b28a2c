//! Configuration parsing and CSV reports for the `price` binary.

pub mod config;
pub mod run;

pub use config::{parse_config, parse_config_with, render, Command, ConfigError, Quantity, RunSpec};
pub use run::{fmt_sig, run, Report};
