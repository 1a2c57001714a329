//! Optional TOML configuration files.
//!
//! `--config <file>` accepts the same keys as the command's flags (flag
//! names with `_` instead of `-`). The merge is deliberately strict: a key
//! set both on the command line and in the file is an error, never a silent
//! override, so an invocation means the same thing no matter which config
//! file it is pointed at. Keys set in neither place fall back to the
//! documented defaults. Unknown keys in the file are rejected.

use std::path::Path;

use serde::de::DeserializeOwned;

use crate::error::CliError;

/// Parse the TOML config file, or produce the all-unset default when no
/// `--config` was given.
pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, CliError> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path).map_err(|err| CliError::io_at(path, err))?;
    toml::from_str(&text)
        .map_err(|err| CliError::Validation(format!("config file {}: {err}", path.display())))
}

/// Merge one optional value from the command line and the config file.
/// Both set is a conflict; one set wins; neither leaves `None` for the
/// caller's default.
pub fn merge<T>(key: &str, cli: Option<T>, file: Option<T>) -> Result<Option<T>, CliError> {
    match (cli, file) {
        (Some(_), Some(_)) => Err(conflict(key)),
        (cli, file) => Ok(cli.or(file)),
    }
}

/// Merge a boolean switch. The flag can only be asserted (`true`), so a
/// config key alongside the flag is a conflict even when both say `true`.
pub fn merge_switch(key: &str, cli: bool, file: Option<bool>) -> Result<bool, CliError> {
    match (cli, file) {
        (true, Some(_)) => Err(conflict(key)),
        (true, None) => Ok(true),
        (false, file) => Ok(file.unwrap_or(false)),
    }
}

fn conflict(key: &str) -> CliError {
    CliError::Validation(format!(
        "'{key}' is set both on the command line and in the config file; set it in one place"
    ))
}
