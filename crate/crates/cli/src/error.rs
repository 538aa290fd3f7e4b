use std::path::Path;

use coherence_kit::coherence::CoherenceError;
use coherence_kit::econometrics::EconError;
use coherence_kit::ingest::IngestError;
use coherence_kit::pipeline::PipelineError;
use coherence_kit::relatedness::RelatednessError;
use coherence_kit::synth::SynthError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, bad config, missing input files.
    #[error("{0}")]
    Usage(String),
    /// Input that could be read but not used.
    #[error("{0}")]
    Data(String),
    /// Rank deficiency, non-finite statistics.
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    pub fn missing(path: &Path) -> Self {
        CliError::Usage(format!("input file not found: {}", path.display()))
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::NotFound {
            CliError::missing(path)
        } else {
            CliError::Data(format!("{}: {e}", path.display()))
        }
    }

    pub fn write(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Data(format!("cannot write {}: {e}", path.display()))
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<RelatednessError> for CliError {
    fn from(e: RelatednessError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<CoherenceError> for CliError {
    fn from(e: CoherenceError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<EconError> for CliError {
    fn from(e: EconError) -> Self {
        match e {
            EconError::RankDeficient | EconError::NonFinite(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        if e.is_numeric() {
            CliError::Numeric(e.to_string())
        } else {
            CliError::Data(e.to_string())
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::InvalidConfig(m) => CliError::Usage(format!("invalid synth config: {m}")),
            other => CliError::Data(other.to_string()),
        }
    }
}
