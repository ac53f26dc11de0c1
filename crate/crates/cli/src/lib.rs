//! Pipeline driver: study configuration, inter-stage artifact formats, the
//! stage implementations behind each subcommand, and run manifests.
//!
//! Stages communicate exclusively through files in the output directory, so
//! each stage is independently runnable and the pipeline is resumable.

pub mod artifacts;
pub mod config;
pub mod error;
pub mod manifest;
pub mod stages;

pub use error::{CliError, ErrorClass};
