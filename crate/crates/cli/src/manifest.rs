use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::files::{write_atomic, Touched};

#[derive(Serialize)]
pub struct FileHash {
    pub path: PathBuf,
    pub sha256: String,
}

/// Record of one invocation, written next to its outputs.
#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub arguments: Vec<String>,
    pub config: Value,
    pub version: &'static str,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
    pub exit_code: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub duration_seconds: f64,
    pub timestamp_unix: u64,
}

impl RunManifest {
    pub fn new(command: &str, config: Value, touched: Touched, exit_code: u8, error: Option<String>, elapsed: Duration) -> Self {
        let hashes = |v: Vec<(PathBuf, String)>| v.into_iter().map(|(path, sha256)| FileHash { path, sha256 }).collect();
        Self {
            command: command.to_string(),
            arguments: std::env::args().collect(),
            config,
            version: env!("CARGO_PKG_VERSION"),
            inputs: hashes(touched.inputs),
            outputs: hashes(touched.outputs),
            exit_code,
            error,
            duration_seconds: elapsed.as_secs_f64(),
            timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        }
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        write_atomic(path, text.as_bytes()).map_err(|e| std::io::Error::other(e.to_string()))
    }
}

/// `<out>.manifest.json` when the command has a primary output, otherwise
/// `toric-spec.manifest.json` in the working directory.
pub fn default_path(out: Option<&Path>) -> PathBuf {
    match out {
        Some(p) => {
            let mut s = p.as_os_str().to_os_string();
            s.push(".manifest.json");
            PathBuf::from(s)
        }
        None => PathBuf::from("toric-spec.manifest.json"),
    }
}
