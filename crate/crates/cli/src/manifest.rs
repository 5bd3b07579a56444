use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use declfc_core::io::{DesignSection, SolverSection, FORMAT_VERSION};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CommandRecord {
    pub name: String,
    pub unix_time: u64,
    pub config_path: String,
    pub config_sha256: String,
    pub plant_sha256: String,
    #[serde(default)]
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub design: DesignSection,
    pub solver: SolverSection,
    #[serde(default)]
    pub strategy: Option<String>,
    #[serde(default)]
    pub exit_code: u8,
}

/// One per run directory; each command appends a record.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub tool_version: String,
    #[serde(rename = "command")]
    pub commands: Vec<CommandRecord>,
}

pub const MANIFEST: &str = "manifest.toml";

impl RunManifest {
    pub fn load_or_new(dir: &Path) -> Self {
        std::fs::read_to_string(dir.join(MANIFEST))
            .ok()
            .and_then(|t| toml::from_str::<RunManifest>(&t).ok())
            .unwrap_or_else(|| RunManifest {
                format_version: FORMAT_VERSION,
                tool_version: env!("CARGO_PKG_VERSION").into(),
                commands: Vec::new(),
            })
    }

    pub fn load(dir: &Path) -> Option<Self> {
        toml::from_str(&std::fs::read_to_string(dir.join(MANIFEST)).ok()?).ok()
    }
}

pub fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}
