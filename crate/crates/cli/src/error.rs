//! Categorized CLI errors and their exit codes.

use std::path::PathBuf;

use crashbench_core::benchmark::BenchmarkError;
use crashbench_core::ingest::IngestError;
use crashbench_core::report::ReportError;
use crashbench_core::simulate::SimulateError;
use crashbench_core::stats::StatsError;

/// Error class reported on stderr and encoded in the exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Parse,
    DataGap,
    Io,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Config => 2,
            ErrorClass::Parse => 3,
            ErrorClass::DataGap => 4,
            ErrorClass::Io => 5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorClass::Config => "config",
            ErrorClass::Parse => "parse",
            ErrorClass::DataGap => "data-gap",
            ErrorClass::Io => "io",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Parse(String),
    DataGap(String),
    Io { path: PathBuf, message: String },
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) | CliError::Parse(m) | CliError::DataGap(m) => f.write_str(m),
            CliError::Io { path, message } => write!(f, "{message} ({})", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn class(&self) -> ErrorClass {
        match self {
            CliError::Config(_) => ErrorClass::Config,
            CliError::Parse(_) => ErrorClass::Parse,
            CliError::DataGap(_) => ErrorClass::DataGap,
            CliError::Io { .. } => ErrorClass::Io,
        }
    }

    pub fn io(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Io {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        match &e {
            IngestError::Config { .. }
            | IngestError::MissingColumn { .. }
            | IngestError::AmbiguousValueMap { .. } => CliError::Config(e.to_string()),
            IngestError::Csv { .. }
            | IngestError::Row { .. }
            | IngestError::MissingRequiredColumn { .. } => CliError::Parse(e.to_string()),
            IngestError::Io { path, .. } => CliError::io(path.clone(), e.to_string()),
        }
    }
}

impl From<BenchmarkError> for CliError {
    fn from(e: BenchmarkError) -> Self {
        match &e {
            BenchmarkError::MissingShare(_)
            | BenchmarkError::MissingAdsMiles(_)
            | BenchmarkError::InvalidFactor(_)
            | BenchmarkError::InvalidShare(_) => CliError::Config(e.to_string()),
            BenchmarkError::MissingCells(_)
            | BenchmarkError::CellMileageMismatch { .. }
            | BenchmarkError::ZeroHumanMileCells { .. }
            | BenchmarkError::NoAdsMiles
            | BenchmarkError::EmptyBlend => CliError::DataGap(e.to_string()),
            _ => CliError::Parse(e.to_string()),
        }
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        CliError::DataGap(e.to_string())
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Io { path, source } => CliError::io(path, source.to_string()),
            ReportError::Benchmark(inner) => inner.into(),
            ReportError::Stats(inner) => inner.into(),
            other => CliError::DataGap(other.to_string()),
        }
    }
}

impl From<SimulateError> for CliError {
    fn from(e: SimulateError) -> Self {
        CliError::Config(e.to_string())
    }
}
