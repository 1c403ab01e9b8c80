use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed TOML or an unknown/mistyped field; the message carries the
    /// line, column and field name from the parser.
    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] cdi_core::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Self::Io { context: context.into(), source }
    }

    /// Stable name for the JSON `error.kind` field.
    pub fn kind(&self) -> &'static str {
        use cdi_core::Error as E;
        match self {
            Self::Parse { .. } => "ParseError",
            Self::Validation(_) => "ValidationError",
            Self::Io { .. } => "IoError",
            Self::Core(e) => match e {
                E::Domain(_) => "Domain",
                E::Convergence { .. } => "Convergence",
                E::NotIntegrable(_) => "NotIntegrable",
                E::Inversion { .. } => "Inversion",
                E::DeltaUndefined => "DeltaUndefined",
                E::InconclusiveTail { .. } => "InconclusiveTail",
                E::NotEntrance(_) => "NotEntrance",
                E::Divergent(_) => "Divergent",
                E::Summability(_) => "Summability",
                E::SeriesDiverges { .. } => "SeriesDiverges",
                E::NegativeVariance(_) => "NegativeVariance",
                E::OutOfRange(_) => "OutOfRange",
                E::Config(_) => "Config",
                E::NoRegime(_) => "NoRegime",
            },
        }
    }

    /// Inconclusive asymptotics exit with 2, everything else with 1.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Core(cdi_core::Error::InconclusiveTail { .. }) => 2,
            _ => 1,
        }
    }
}
