use std::fmt;

/// Exit status 2: the input was unusable. Exit status 1 is reserved for
/// verification failures, which are not errors.
#[derive(Debug)]
pub enum CliError {
    /// Missing or conflicting flags; reported with the usage line.
    Usage(String),
    /// Bad values or unreadable data.
    Input(String),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Input(msg) | CliError::Io(msg) => f.write_str(msg),
        }
    }
}

impl From<pairstop::Error> for CliError {
    fn from(e: pairstop::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
