use std::fmt;
use std::path::{Path, PathBuf};

/// Exit status classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Failure {
    /// Malformed spec, bad flags, or input rejected by an analysis.
    Validation,
    /// A numeric routine did not deliver a result.
    Numeric,
}

impl Failure {
    pub fn exit_code(self) -> u8 {
        match self {
            Failure::Validation => 1,
            Failure::Numeric => 2,
        }
    }
}

/// An error located in a spec file by JSON pointer; `""` is the whole document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub failure: Failure,
    pub file: PathBuf,
    pub pointer: String,
    pub message: String,
}

impl CliError {
    pub fn validation(file: &Path, pointer: impl Into<String>, message: impl fmt::Display) -> Self {
        CliError { failure: Failure::Validation, file: file.to_path_buf(), pointer: pointer.into(), message: message.to_string() }
    }

    pub fn numeric(file: &Path, pointer: impl Into<String>, message: impl fmt::Display) -> Self {
        CliError { failure: Failure::Numeric, file: file.to_path_buf(), pointer: pointer.into(), message: message.to_string() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}: {}", self.file.display(), self.pointer, self.message)
    }
}

impl std::error::Error for CliError {}

/// Escapes one JSON pointer reference token.
pub fn token(key: &str) -> String {
    key.replace('~', "~0").replace('/', "~1")
}
