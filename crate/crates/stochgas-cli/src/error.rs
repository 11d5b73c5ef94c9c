//! Exit codes: 0 success, 2 configuration error, 3 numerical tolerance
//! failure, 4 domain error. Errors are emitted as machine-readable JSON
//! on standard error.

use stochgas::Error;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(std::io::Error),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Core(Error::Constraint(_)) => 2,
            CliError::Core(Error::Tolerance { .. }) => 3,
            CliError::Core(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Core(Error::Constraint(_)) => "constraint",
            CliError::Core(Error::Tolerance { .. }) => "tolerance",
            CliError::Core(Error::Vacuum { .. }) => "vacuum",
            CliError::Core(Error::DegenerateRoot { .. }) => "degenerate-root",
            CliError::Core(Error::EmptyFan { .. }) => "vacuum",
            CliError::Core(Error::Window(_)) => "window",
            CliError::Core(Error::Rarefaction) => "rarefaction",
            CliError::Core(Error::Indeterminate(_)) => "indeterminate",
            CliError::Core(Error::Domain(_)) => "domain",
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Config(m) => m.clone(),
            CliError::Io(e) => e.to_string(),
            CliError::Core(e) => e.to_string(),
        }
    }
}
