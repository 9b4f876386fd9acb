//! Report envelope, input digests and atomic output.

use std::io::Write;
use std::path::{Path, PathBuf};

use invcore::io::{from_json, to_json, Document, FormatError};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// An input file read once, remembered with its digest.
pub struct Input {
    pub path: PathBuf,
    pub text: String,
}

impl Input {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        Ok(Input { path: path.to_path_buf(), text })
    }

    pub fn parse<D: Document>(&self) -> Result<D, CliError> {
        from_json(&self.text).map_err(|source| self.format_error(source))
    }

    pub fn format_error(&self, source: FormatError) -> CliError {
        CliError::Format { path: self.path.clone(), source }
    }

    pub fn digest(&self) -> InputDigest {
        InputDigest { path: self.path.display().to_string(), sha256: sha256_hex(self.text.as_bytes()) }
    }
}

/// `invcore.report`. Everything except `elapsed_ms` is a function of the
/// command line and the input bytes.
#[derive(Serialize)]
pub struct Report<P> {
    pub format: &'static str,
    pub version: u32,
    pub command: String,
    pub args: Vec<String>,
    pub tool_version: &'static str,
    pub inputs: Vec<InputDigest>,
    pub payload: P,
    pub payload_sha256: String,
    pub elapsed_ms: u128,
}

impl<P: Serialize> Report<P> {
    pub fn new(command: &str, args: Vec<String>, inputs: &[&Input], payload: P, elapsed_ms: u128) -> Self {
        let payload_sha256 = sha256_hex(to_json(&payload).as_bytes());
        Report {
            format: "invcore.report",
            version: invcore::io::VERSION,
            command: command.to_string(),
            args,
            tool_version: env!("CARGO_PKG_VERSION"),
            inputs: inputs.iter().map(|i| i.digest()).collect(),
            payload,
            payload_sha256,
            elapsed_ms,
        }
    }
}

/// Writes `text` to `path` via a temporary file in the same directory, or to
/// stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    let Some(path) = path else {
        print!("{text}");
        return Ok(());
    };
    write_atomic(path, text.as_bytes())
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io_err = |source| CliError::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}
