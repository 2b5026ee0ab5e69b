//! Structured command-line errors with a stable exit-code contract.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical
//! failure (a well-formed request whose mathematics could not be carried
//! out). Every error is also emitted on stderr as a single-line JSON record
//! `{"error":{"kind":...,"message":...}}` so batch drivers can parse
//! failures without scraping prose.

use tpef_core::ModelError;

/// Exit code for usage and configuration errors.
pub const EXIT_USAGE: i32 = 1;
/// Exit code for numerical failures.
pub const EXIT_NUMERICAL: i32 = 2;

/// A command failure carrying its machine-readable kind and exit code.
#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub exit_code: i32,
    pub message: String,
}

impl CliError {
    /// Usage error: bad flags, inconsistent arguments.
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            kind: "usage",
            exit_code: EXIT_USAGE,
            message: message.into(),
        }
    }

    /// Configuration error: unparseable or invalid run config.
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            kind: "config",
            exit_code: EXIT_USAGE,
            message: message.into(),
        }
    }

    /// Prepends an origin (usually a file path) to the message.
    pub(crate) fn with_prefix(mut self, prefix: impl std::fmt::Display) -> Self {
        self.message = format!("{prefix}: {}", self.message);
        self
    }

    /// The single-line JSON record emitted on stderr.
    pub fn to_json_line(&self) -> String {
        serde_json::json!({
            "error": { "kind": self.kind, "message": self.message }
        })
        .to_string()
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl From<ModelError> for CliError {
    fn from(err: ModelError) -> Self {
        let (kind, exit_code) = match &err {
            ModelError::InvalidInput(_) => ("invalid_input", EXIT_USAGE),
            ModelError::Format(_) => ("format", EXIT_USAGE),
            ModelError::Io(_) => ("io", EXIT_USAGE),
            ModelError::OutOfDomain { .. } => ("out_of_domain", EXIT_NUMERICAL),
            ModelError::NotRedDetuned { .. } => ("not_red_detuned", EXIT_NUMERICAL),
            ModelError::NonConvergence(_) => ("non_convergence", EXIT_NUMERICAL),
            ModelError::DegenerateData(_) => ("degenerate_data", EXIT_NUMERICAL),
            ModelError::RegimeCheck { .. } => ("regime_check", EXIT_NUMERICAL),
        };
        CliError {
            kind,
            exit_code,
            message: err.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError {
            kind: "io",
            exit_code: EXIT_USAGE,
            message: err.to_string(),
        }
    }
}
