use nijenhuis::singularity::MorseError;
use nijenhuis::Error;
use serde::Serialize;

/// A failure that ends a run, with its exit code and machine-readable kind.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{flag}: {message}")]
    Parse {
        flag: &'static str,
        message: String,
        /// Byte offset into the flag's value.
        position: usize,
    },
    #[error("{0}")]
    Config(String),
    #[error("{message}")]
    Numerical { kind: &'static str, message: String },
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorReason {
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub position: Option<usize>,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse { .. } | CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical { .. } => 3,
        }
    }

    pub fn reason(&self) -> ErrorReason {
        let (kind, position) = match self {
            CliError::Usage(_) => ("usage", None),
            CliError::Parse { position, .. } => ("parse", Some(*position)),
            CliError::Config(_) => ("config", None),
            CliError::Numerical { kind, .. } => (*kind, None),
            CliError::Io(_) => ("io", None),
        };
        // reasons are single lines
        let message = self.to_string().lines().next().unwrap_or_default().to_string();
        ErrorReason { kind, message, position }
    }

    pub fn numerical(kind: &'static str, message: impl Into<String>) -> Self {
        CliError::Numerical {
            kind,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(p) => CliError::Parse {
                flag: "expression",
                message: p.kind.to_string(),
                position: p.position,
            },
            Error::InvalidDimension { .. } | Error::InvalidInput(_) => CliError::Config(e.to_string()),
            Error::DomainSingular { .. } => CliError::numerical("singular_domain", e.to_string()),
            Error::Field(_) => CliError::numerical("evaluation", e.to_string()),
            Error::CharPoly(_) => CliError::numerical("charpoly", e.to_string()),
            Error::Morse(m) => m.into(),
        }
    }
}

impl From<MorseError> for CliError {
    fn from(e: MorseError) -> Self {
        match e {
            MorseError::NonMorse { .. } => CliError::numerical("non_morse", e.to_string()),
            MorseError::Diverged { .. } => CliError::numerical("newton_divergence", e.to_string()),
            MorseError::Field(_) => CliError::numerical("evaluation", e.to_string()),
            MorseError::InvalidInput(_) => CliError::Config(e.to_string()),
        }
    }
}

impl From<nijenhuis::FieldError> for CliError {
    fn from(e: nijenhuis::FieldError) -> Self {
        CliError::numerical("evaluation", e.to_string())
    }
}
