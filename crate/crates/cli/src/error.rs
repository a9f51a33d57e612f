use std::path::PathBuf;

use serde_json::json;

/// Every way a command can fail. Each variant maps to its own exit code.
#[derive(Debug)]
pub enum CliError {
    Core(echomesh::Error),
    MissingInput(PathBuf),
    OutputExists(PathBuf),
    Resume(String),
    GradcheckFailed(String),
    Usage(String),
}

impl From<echomesh::Error> for CliError {
    fn from(e: echomesh::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.category(),
            CliError::MissingInput(_) => "missing-input",
            CliError::OutputExists(_) => "output-exists",
            CliError::Resume(_) => "resume",
            CliError::GradcheckFailed(_) => "gradcheck",
            CliError::Usage(_) => "usage",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "usage" => 2,
            "config" => 3,
            "mesh" => 4,
            "format" => 5,
            "input" => 6,
            "numeric" => 7,
            "io" => 8,
            "missing-input" => 9,
            "output-exists" => 10,
            "gradcheck" => 11,
            "resume" => 12,
            _ => 1,
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Core(e) => e.to_string(),
            CliError::MissingInput(p) => format!("input file not found: {}", p.display()),
            CliError::OutputExists(p) => format!("{} already exists; pass --force to replace it", p.display()),
            CliError::Resume(m) | CliError::GradcheckFailed(m) | CliError::Usage(m) => m.clone(),
        }
    }

    /// One line of JSON for stderr.
    pub fn to_line(&self) -> String {
        json!({
            "error": self.category(),
            "exit_code": self.exit_code(),
            "message": self.message(),
        })
        .to_string()
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.category(), self.message())
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;
