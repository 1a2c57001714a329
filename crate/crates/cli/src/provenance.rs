//! Deterministic run records.
//!
//! Every command writes a JSON record beside its outputs holding the tool
//! version and the full resolved configuration — everything that determines
//! the output bytes, and nothing that does not (no timestamps, no host
//! names, no worker counts). Rerunning the same invocation therefore
//! rewrites the identical record, which keeps "outputs + provenance" as a
//! unit that can be diffed across machines and reruns.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

/// The record written beside each output.
#[derive(Debug, Serialize)]
pub struct Provenance<T: Serialize> {
    /// Binary name.
    pub tool: &'static str,
    /// Crate version of the binary.
    pub version: &'static str,
    /// Subcommand that produced the output.
    pub command: &'static str,
    /// Full resolved configuration after merging flags, config file, and
    /// defaults.
    pub config: T,
}

impl<T: Serialize> Provenance<T> {
    pub fn new(command: &'static str, config: T) -> Self {
        Provenance {
            tool: "mdwm",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
        }
    }

    /// Serialize to pretty JSON with a trailing newline and write to `path`.
    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut body = serde_json::to_string_pretty(self)
            .map_err(|err| CliError::Io(format!("{}: {err}", path.display())))?;
        body.push('\n');
        std::fs::write(path, body).map_err(|err| CliError::io_at(path, err))
    }
}

/// Where the provenance for a file output lives: a sibling whose extension
/// is replaced by `provenance.json` (`scores.csv` → `scores.provenance.json`).
pub fn sibling_path(output: &Path) -> PathBuf {
    output.with_extension("provenance.json")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sibling_replaces_the_extension() {
        assert_eq!(
            sibling_path(Path::new("results/scores.csv")),
            Path::new("results/scores.provenance.json")
        );
        assert_eq!(
            sibling_path(Path::new("summary")),
            Path::new("summary.provenance.json")
        );
    }

    #[test]
    fn record_is_deterministic_json() {
        let record = Provenance::new("eval", vec![1, 2, 3]);
        let first = serde_json::to_string_pretty(&record).unwrap();
        let second = serde_json::to_string_pretty(&record).unwrap();
        assert_eq!(first, second);
        assert!(first.contains("\"tool\": \"mdwm\""));
        assert!(
            !first.to_lowercase().contains("time"),
            "no timestamps: {first}"
        );
    }
}
