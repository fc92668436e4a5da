//! `hammerstein-kit`: problem files in, constants, criterion verdicts and
//! discrete solutions out.

pub mod app;
pub mod commands;
pub mod error;
pub mod expr;
pub mod format;
pub mod output;
pub mod problem_file;

pub use error::CliError;
pub use output::{Body, Output, SCHEMA};
