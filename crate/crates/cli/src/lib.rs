//! Table builders and state-file bounds behind the `steering` binary.

use std::io;

use clap::ValueEnum;

pub mod bound;
pub mod tables;

/// Output format for the table commands.
#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Errors mapped onto the documented exit codes.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    NoConvergence(String),
    Io(io::Error),
}

impl From<steering_core::Error> for Failure {
    fn from(e: steering_core::Error) -> Self {
        match e {
            steering_core::Error::NoConvergence(m) => Failure::NoConvergence(m),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(io::Error::other(e))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(io::Error::other(e))
    }
}
