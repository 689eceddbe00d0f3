//! File formats, trace output and the command-line runner for
//! `smoothprox-core`.

pub mod config;
mod error;
pub mod io;
pub mod run;
pub mod trace;

pub use config::{InstanceSource, ProblemKind, RunConfig, ScheduleSpec, SyntheticSpec};
pub use error::CliError;
pub use run::{run, RunReport, RunSummary};
