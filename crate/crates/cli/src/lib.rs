//! Experiment drivers, configuration and output for the `ans` command-line
//! tool.

pub mod checks;
pub mod config;
pub mod data;
pub mod error;
pub mod experiments;
pub mod oracles;
pub mod output;
