use std::path::PathBuf;

use kernel_envelope::Error as CoreError;

pub type Result<T> = std::result::Result<T, CliError>;

/// Process exit codes.
pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_ASSUMPTION: u8 = 3;
pub const EXIT_SOLVER: u8 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("data rows {first} and {second} have coinciding sites (distance {distance:e})")]
    DuplicateRows { first: usize, second: usize, distance: f64 },

    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        Self::Input(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Core(CoreError::NormBoundViolated { .. } | CoreError::EmptyIntersection { .. }) => EXIT_ASSUMPTION,
            Self::Core(CoreError::NotConverged { .. } | CoreError::Conditioning { .. }) => EXIT_SOLVER,
            _ => EXIT_INPUT,
        }
    }

    /// Short stable tag for the one-line error report.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Input(_) => "input",
            Self::Io { .. } => "io",
            Self::Csv { .. } => "csv",
            Self::Json { .. } => "json",
            Self::DuplicateRows { .. } => "duplicate-sites",
            Self::Core(e) => match e {
                CoreError::DimensionMismatch { .. } | CoreError::LengthMismatch { .. } => "shape",
                CoreError::InvalidParameter { .. } | CoreError::Empty(_) => "invalid-parameter",
                CoreError::DuplicateSites { .. } => "duplicate-sites",
                CoreError::SingularGram { .. } => "singular-gram",
                CoreError::Conditioning { .. } => "conditioning",
                CoreError::NormBoundViolated { .. } => "norm-bound",
                CoreError::NotConverged { .. } => "not-converged",
                CoreError::EmptyIntersection { .. } => "empty-intersection",
                CoreError::WrongModelKind { .. } => "model-kind",
            },
        }
    }

    /// `error code=<n> kind=<tag>: <message>` on a single line.
    pub fn report(&self) -> String {
        let msg = self.to_string().replace(['\n', '\r'], " ");
        format!("error code={} kind={}: {msg}", self.exit_code(), self.kind())
    }
}
