use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

/// Everything needed to reproduce a run.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: &'static str,
    pub args: serde_json::Value,
    pub seed: Option<u64>,
    pub version: &'static str,
    pub timestamp_unix: u64,
}

impl RunManifest {
    pub fn new(subcommand: &'static str, args: &impl Serialize, seed: Option<u64>) -> Self {
        RunManifest {
            subcommand,
            args: serde_json::to_value(args).expect("arguments serialise"),
            seed,
            version: env!("CARGO_PKG_VERSION"),
            timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("manifest serialises")
    }

    /// One-line CSV comment.
    pub fn csv_comment(&self) -> String {
        format!("# manifest: {}\n", self.to_json())
    }
}
