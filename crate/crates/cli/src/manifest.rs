//! Machine-readable run manifests emitted by `--json`.
//!
//! A manifest records the subcommand, the input paths, the search
//! configuration, the tool version, and the full result payload. Feeding the
//! recorded inputs and configuration back through the same subcommand in
//! sequential mode reproduces every payload field except wall-clock timing.

use mt_interleave::engine::{ReportDocument, WitnessDocument};
use mt_interleave::{OracleReport, ScalarValue, SearchConfig};
use serde::{Deserialize, Serialize};

/// Version stamp for the manifest layout.
pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

/// Everything needed to audit and replay one CLI run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    /// Version of the binary that produced this manifest.
    pub tool_version: String,
    pub subcommand: String,
    /// Input paths exactly as given on the command line.
    pub inputs: Vec<String>,
    pub config: SearchConfig,
    pub payload: Payload,
}

/// Per-subcommand result payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Payload {
    Distance {
        report: ReportDocument,
    },
    Check {
        epsilon: ScalarValue,
        interleaved: bool,
        maps_enumerated: u64,
        refined_target_sizes: Vec<usize>,
        witness: Option<WitnessDocument>,
    },
    Oracle {
        report: OracleReport,
        /// Present when `--compare` also ran the engine.
        engine_epsilon_star: Option<ScalarValue>,
    },
}

impl RunManifest {
    pub fn new(
        subcommand: &str,
        inputs: &[String],
        config: SearchConfig,
        payload: Payload,
    ) -> RunManifest {
        RunManifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            inputs: inputs.to_vec(),
            config,
            payload,
        }
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn to_json_bytes(&self) -> Vec<u8> {
        let mut bytes =
            serde_json::to_vec_pretty(self).expect("manifest serialization cannot fail");
        bytes.push(b'\n');
        bytes
    }
}
