//! `manifest.json`: config echo, input hashes, tool version. The only file
//! a run writes that carries a timestamp.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct InputHash {
    pub path: PathBuf,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config: &'a RunConfig,
    pub inputs: Vec<InputHash>,
    pub outputs: Vec<String>,
    pub created_unix: u64,
}

pub fn hash_bytes(data: &[u8]) -> String {
    Sha256::digest(data)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn hash_file(path: &Path) -> Result<InputHash, CliError> {
    let data = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(InputHash {
        path: path.to_path_buf(),
        bytes: data.len() as u64,
        sha256: hash_bytes(&data),
    })
}

pub fn write(
    dir: &Path,
    command: &str,
    config: &RunConfig,
    inputs: &[PathBuf],
    mut outputs: Vec<String>,
) -> Result<(), CliError> {
    outputs.sort();
    let manifest = Manifest {
        tool: "coherence-kit",
        version: env!("CARGO_PKG_VERSION"),
        command,
        config,
        inputs: inputs.iter().map(|p| hash_file(p)).collect::<Result<_, _>>()?,
        outputs,
        created_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
    };
    let path = dir.join(MANIFEST);
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::write(&path, e))?;
    std::fs::write(&path, json + "\n").map_err(|e| CliError::write(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_abc() {
        assert_eq!(
            hash_bytes(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
