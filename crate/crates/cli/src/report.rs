//! Versioned JSON run reports.
//!
//! Every subcommand writes a `report.json` with four sections:
//! `schema_version`, `config_echo` (the fully resolved run configuration,
//! when the command took one), `results` (operation-specific outputs), and
//! `provenance` (tool identity, exact argv, seed, RNG identity, wall-clock
//! timestamp). A report is self-contained: feeding the echoed config back
//! in with the same command line reproduces every non-stochastic number
//! bit for bit, and the stochastic ones too given the same seed.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::io::atomic_write;

/// Version of the report layout written by this build.
pub const SCHEMA_VERSION: u32 = 1;

/// One run report.
#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_echo: Option<RunConfig>,
    pub results: serde_json::Value,
    pub provenance: Provenance,
}

/// How the report came to be.
#[derive(Debug, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    /// Exact argv of the invocation.
    pub command: Vec<String>,
    /// Counting-noise seed in effect, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Identity of the counting-noise generator (stable by contract).
    pub rng: &'static str,
    pub created_unix_s: u64,
}

impl Report {
    pub fn new(
        config_echo: Option<RunConfig>,
        results: serde_json::Value,
        command: Vec<String>,
        seed: Option<u64>,
    ) -> Report {
        Report {
            schema_version: SCHEMA_VERSION,
            config_echo,
            results,
            provenance: Provenance {
                tool: "tpef",
                version: env!("CARGO_PKG_VERSION"),
                command,
                seed,
                rng: "chacha8 per-point streams, poisson counts",
                created_unix_s: SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0),
            },
        }
    }

    /// Writes `report.json` into `dir` atomically and returns its path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join("report.json");
        let mut text = serde_json::to_string_pretty(self).map_err(|e| CliError {
            kind: "report",
            exit_code: crate::error::EXIT_USAGE,
            message: format!("cannot serialize report: {e}"),
        })?;
        text.push('\n');
        atomic_write(&path, &text)?;
        Ok(path)
    }
}
