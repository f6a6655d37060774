use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::CliError;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

/// Pretty JSON to `path`, or to stdout when no path is given.
pub fn emit<T: Serialize>(value: &T, path: Option<&PathBuf>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.clone(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Seconds since the Unix epoch; the only nondeterministic report field.
pub fn timestamp() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

/// Report envelope: the command's payload plus a timestamp.
#[derive(Serialize)]
pub struct Report<T: Serialize> {
    pub command: &'static str,
    #[serde(flatten)]
    pub body: T,
    pub timestamp: u64,
}

impl<T: Serialize> Report<T> {
    pub fn new(command: &'static str, body: T) -> Self {
        Report {
            command,
            body,
            timestamp: timestamp(),
        }
    }
}
