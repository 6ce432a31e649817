//! File formats, judge backends and the `lit-eval` command line.

pub mod backend;
pub mod cli;
pub mod commands;
pub mod config;
pub mod data;
pub mod error;
pub mod io;
pub mod pipeline;

pub use error::{CliError, Result};
