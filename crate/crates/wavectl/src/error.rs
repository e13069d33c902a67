use std::fmt;
use std::path::PathBuf;

use wavectl_core::Violation;

/// Command failure, classified by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Unparseable configuration or input data.
    #[error("{0}")]
    Parse(String),
    /// Configuration that parsed but breaks invariants.
    #[error("invalid configuration:\n{}", ViolationList(.0))]
    Invalid(Vec<Violation>),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Solver(#[from] wavectl_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Invalid(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Solver(_) => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

struct ViolationList<'a>(&'a [Violation]);

impl fmt::Display for ViolationList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "  {v}")?;
        }
        Ok(())
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
