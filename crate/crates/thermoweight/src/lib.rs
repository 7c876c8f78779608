//! Batch front end for `thermoweight-core`: JSON jobs in, JSON reports and
//! CSV cylinder tables out.

use std::fmt;

pub mod job;
mod report;
mod run;

pub use job::{Command, JobSpec};
pub use run::{run, write_csv, Outcome};

/// Why a job failed, grouped by exit status.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    /// Unparseable input or a violated precondition.
    Invalid(String),
    /// A resource cap stopped the computation.
    Cap(String),
    Other(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Invalid(_) => 2,
            Failure::Cap(_) => 3,
            Failure::Other(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Invalid(m) => write!(f, "invalid job: {m}"),
            Failure::Cap(m) => write!(f, "resource cap: {m}"),
            Failure::Other(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for Failure {}

impl From<thermoweight_core::Error> for Failure {
    fn from(e: thermoweight_core::Error) -> Self {
        use thermoweight_core::Error as E;
        match e {
            E::ResourceCap { .. } => Failure::Cap(e.to_string()),
            E::EmptySupport => Failure::Other(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}
