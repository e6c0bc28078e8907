//! Run manifests: what was run, on what, and how fast.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use txmotif_core::{EngineConfig, RowFlag};

use crate::error::{CliError, Result};

/// Per-batch latency summary in milliseconds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LatencySummary {
    pub mean: f64,
    pub p50: f64,
    pub p99: f64,
    pub max: f64,
}

impl LatencySummary {
    /// Nearest-rank percentiles.
    pub fn from_durations(batches: &[Duration]) -> Self {
        if batches.is_empty() {
            return LatencySummary::default();
        }
        let mut ms: Vec<f64> = batches.iter().map(|d| d.as_secs_f64() * 1e3).collect();
        ms.sort_by(f64::total_cmp);
        let rank = |p: f64| ms[((p * ms.len() as f64).ceil() as usize).clamp(1, ms.len()) - 1];
        LatencySummary {
            mean: ms.iter().sum::<f64>() / ms.len() as f64,
            p50: rank(0.50),
            p99: rank(0.99),
            max: ms[ms.len() - 1],
        }
    }
}

/// Fields that depend on the clock. Everything outside this block is
/// reproducible for identical inputs, seed and thread count.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub started_at: String,
    pub elapsed_s: f64,
    pub latency_ms: LatencySummary,
    pub throughput_rows_per_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: EngineConfig,
    pub input: PathBuf,
    pub output: Option<PathBuf>,
    pub state: Option<PathBuf>,
    pub batch_size: usize,
    pub threads: usize,
    pub rows_in: u64,
    pub rows_out: u64,
    pub batches: u64,
    /// Row count per flag name, every flag listed.
    pub row_flags: BTreeMap<String, u64>,
    pub timing: Timing,
}

pub fn empty_flag_counts() -> BTreeMap<String, u64> {
    RowFlag::ALL.iter().map(|f| (f.name().to_string(), 0)).collect()
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        if path == Path::new("-") {
            println!("{text}");
            return Ok(());
        }
        std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
    }
}
