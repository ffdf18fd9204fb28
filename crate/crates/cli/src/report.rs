use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Machine-readable record of one invocation. Everything except
/// `wall_clock_ms` is a function of the inputs and the seed.
#[derive(Debug, Serialize)]
pub struct AuditRunReport {
    pub command: Vec<String>,
    pub tool_version: &'static str,
    pub seed: Option<u64>,
    pub seed_scheme: &'static str,
    pub schema_digest: Option<String>,
    /// Input role → SHA-256 of the file contents.
    pub input_digests: BTreeMap<String, String>,
    pub results: serde_json::Value,
    pub wall_clock_ms: u128,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Files read by a command, with their digests.
#[derive(Debug, Default)]
pub struct Inputs {
    pub schema_digest: Option<String>,
    pub digests: BTreeMap<String, String>,
}

impl Inputs {
    pub fn read(&mut self, role: &str, path: &Path) -> CliResult<String> {
        let bytes = std::fs::read(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let digest = sha256_hex(&bytes);
        if role == "schema" {
            self.schema_digest = Some(digest.clone());
        }
        self.digests.insert(role.to_string(), digest);
        String::from_utf8(bytes).map_err(|_| CliError::Input {
            path: path.to_path_buf(),
            message: "not valid UTF-8".into(),
        })
    }
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}
