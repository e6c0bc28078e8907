//! Feature-row layout and encoding.
//!
//! A row holds, in order: the basic transaction fields, a `row_flag` column,
//! binned pattern counts (simple cycles, temporal cycles, scatter-gather) and
//! per-endpoint account features (fans, gather-scatter flag, statistics with
//! presence flags). The column order is a pure function of the configuration.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::engine::EngineConfig;
use crate::error::ConfigError;
use crate::pattern::PatternReport;
use crate::stats::Stat;
use crate::types::{Direction, EdgeId, LengthHistogram, RowFlag, Transaction};
use crate::FxHashSet;

/// Size bins for one pattern family. Bin `k` counts sizes in
/// `[boundaries[k], boundaries[k + 1])`; the last bin counts every size from
/// the last boundary upwards.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(transparent))]
pub struct BinSpec {
    pub boundaries: Vec<u32>,
}

impl BinSpec {
    /// One bin per size in `lo..=hi`.
    pub fn consecutive(lo: u32, hi: u32) -> Self {
        BinSpec { boundaries: (lo..=hi).collect() }
    }

    pub fn validate(&self, family: &'static str) -> Result<(), ConfigError> {
        let err = |reason| Err(ConfigError::Bins { family, reason });
        match self.boundaries.first() {
            None => return err("no boundaries"),
            Some(&b) if b < 2 => return err("first boundary below 2"),
            _ => {}
        }
        if self.boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return err("boundaries not strictly increasing");
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.boundaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundaries.is_empty()
    }

    pub fn bin_of(&self, size: u32) -> Option<usize> {
        let k = self.boundaries.partition_point(|&b| b <= size);
        k.checked_sub(1)
    }

    /// Bin counts for a multiset of sizes.
    pub fn histogram(&self, sizes: &LengthHistogram) -> Vec<u64> {
        let mut bins = alloc::vec![0u64; self.boundaries.len()];
        for (size, count) in sizes.iter() {
            if let Some(k) = self.bin_of(size) {
                bins[k] += count;
            }
        }
        bins
    }

    /// Column suffixes. The last bin gets a `plus` suffix unless `bound`
    /// caps sizes at its boundary.
    fn labels(&self, bound: Option<u32>) -> Vec<String> {
        let n = self.boundaries.len();
        (0..n)
            .map(|k| {
                let lo = self.boundaries[k];
                if k + 1 == n {
                    if bound.is_some_and(|m| m <= lo) {
                        lo.to_string()
                    } else {
                        format!("{lo}plus")
                    }
                } else {
                    let hi = self.boundaries[k + 1] - 1;
                    if hi == lo {
                        lo.to_string()
                    } else {
                        format!("{lo}to{hi}")
                    }
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default, deny_unknown_fields))]
pub struct BinSpecs {
    pub simple_cycles: BinSpec,
    pub temporal_cycles: BinSpec,
    pub scatter_gather: BinSpec,
}

impl Default for BinSpecs {
    fn default() -> Self {
        BinSpecs {
            simple_cycles: BinSpec::consecutive(2, 10),
            temporal_cycles: BinSpec::consecutive(2, 30),
            scatter_gather: BinSpec::consecutive(2, 10),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Endpoint {
    Source,
    Target,
}

impl Endpoint {
    pub fn prefix(self) -> &'static str {
        match self {
            Endpoint::Source => "src",
            Endpoint::Target => "dst",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColumnKind {
    EdgeId,
    SourceAccount,
    TargetAccount,
    Timestamp,
    Attribute(usize),
    RowFlag,
    SimpleCycleBin(usize),
    TemporalCycleBin(usize),
    ScatterGatherBin(usize),
    FanIn(Endpoint),
    FanOut(Endpoint),
    GatherScatter(Endpoint),
    /// Index into the endpoint's statistics vector.
    Stat(Endpoint, usize),
    StatPresent(Endpoint, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

/// Ordered column descriptors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSchema {
    columns: Vec<Column>,
    /// (direction, stat attribute, stat) per account statistics slot.
    stat_slots: Vec<(Direction, usize, Stat)>,
}

/// Lower-case, `[a-z0-9_]` only.
fn slug(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect()
}

impl FeatureSchema {
    pub fn build(config: &EngineConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let mut columns = Vec::new();
        let mut push = |name: String, kind| columns.push(Column { name, kind });
        let s = &config.schema;
        push(s.edge_id.clone(), ColumnKind::EdgeId);
        if !config.exclude_account_ids {
            push(s.source.clone(), ColumnKind::SourceAccount);
            push(s.target.clone(), ColumnKind::TargetAccount);
        }
        push(s.timestamp.clone(), ColumnKind::Timestamp);
        for (i, a) in s.attributes.iter().enumerate() {
            push(a.clone(), ColumnKind::Attribute(i));
        }
        push("row_flag".into(), ColumnKind::RowFlag);

        let t = &config.toggles;
        if t.simple_cycles {
            for (k, l) in config.bins.simple_cycles.labels(Some(config.cycles.max_length)).into_iter().enumerate() {
                push(format!("cycle_len_{l}"), ColumnKind::SimpleCycleBin(k));
            }
        }
        if t.temporal_cycles {
            let labels = config.bins.temporal_cycles.labels(config.cycles.temporal_max_length);
            for (k, l) in labels.into_iter().enumerate() {
                push(format!("tcycle_len_{l}"), ColumnKind::TemporalCycleBin(k));
            }
        }
        if t.scatter_gather {
            for (k, l) in config.bins.scatter_gather.labels(None).into_iter().enumerate() {
                push(format!("sg_size_{l}"), ColumnKind::ScatterGatherBin(k));
            }
        }

        let stats = config.stats.enabled_ordered();
        let mut stat_slots = Vec::new();
        if config.stats.is_active() {
            for dir in Direction::BOTH {
                for a in 0..config.stats.attributes.len() {
                    for &st in &stats {
                        stat_slots.push((dir, a, st));
                    }
                }
            }
        }
        for ep in [Endpoint::Source, Endpoint::Target] {
            let p = ep.prefix();
            if t.fan {
                push(format!("{p}_fan_in"), ColumnKind::FanIn(ep));
                push(format!("{p}_fan_out"), ColumnKind::FanOut(ep));
                push(format!("{p}_gather_scatter"), ColumnKind::GatherScatter(ep));
            }
            for (slot, &(dir, a, st)) in stat_slots.iter().enumerate() {
                let base = format!("{p}_{}_{}_{}", dir.name(), slug(&config.stats.attributes[a]), st.name());
                push(base.clone(), ColumnKind::Stat(ep, slot));
                push(format!("{base}_present"), ColumnKind::StatPresent(ep, slot));
            }
        }

        let mut names = FxHashSet::default();
        if let Some(c) = columns.iter().find(|c| !names.insert(c.name.as_str())) {
            return Err(ConfigError::DuplicateColumn(c.name.clone()));
        }
        drop(names);
        Ok(FeatureSchema { columns, stat_slots })
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> + '_ {
        self.columns.iter().map(|c| c.name.as_str())
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Statistics computed per endpoint, in slot order.
    pub fn stat_slots(&self) -> &[(Direction, usize, Stat)] {
        &self.stat_slots
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureValue {
    Int(i64),
    UInt(u64),
    Real(f64),
    Text(String),
}

impl FeatureValue {
    pub fn as_u64(&self) -> Option<u64> {
        match *self {
            FeatureValue::UInt(x) => Some(x),
            FeatureValue::Int(x) => u64::try_from(x).ok(),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            FeatureValue::UInt(x) => Some(x as f64),
            FeatureValue::Int(x) => Some(x as f64),
            FeatureValue::Real(x) => Some(x),
            FeatureValue::Text(_) => None,
        }
    }
}

impl fmt::Display for FeatureValue {
    /// Integers verbatim, reals in shortest round-trip form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureValue::Int(x) => write!(f, "{x}"),
            FeatureValue::UInt(x) => write!(f, "{x}"),
            FeatureValue::Real(x) => write!(f, "{x}"),
            FeatureValue::Text(s) => f.write_str(s),
        }
    }
}

/// One encoded transaction.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub edge_id: EdgeId,
    pub values: Vec<FeatureValue>,
}

/// Statistics of one endpoint, aligned with [`FeatureSchema::stat_slots`];
/// `None` when the account has no live edges in that direction.
pub type AccountStats = [Option<f64>];

/// Encodes one row. Error rows get all-zero graph features.
pub fn encode(
    schema: &FeatureSchema,
    config: &EngineConfig,
    txn: &Transaction,
    flag: RowFlag,
    report: &PatternReport,
    src_stats: &AccountStats,
    dst_stats: &AccountStats,
) -> FeatureRow {
    let cycle_bins = config.bins.simple_cycles.histogram(&report.simple_cycle_lengths);
    let tcycle_bins = config.bins.temporal_cycles.histogram(&report.temporal_cycle_lengths);
    let sg_bins = config.bins.scatter_gather.histogram(&report.sg_intermediate_sizes);
    let stats_of = |ep| match ep {
        Endpoint::Source => src_stats,
        Endpoint::Target => dst_stats,
    };
    let values = schema
        .columns
        .iter()
        .map(|c| match c.kind {
            ColumnKind::EdgeId => FeatureValue::UInt(txn.edge_id.0),
            ColumnKind::SourceAccount => FeatureValue::Text(txn.source.clone()),
            ColumnKind::TargetAccount => FeatureValue::Text(txn.target.clone()),
            ColumnKind::Timestamp => FeatureValue::Int(txn.timestamp),
            ColumnKind::Attribute(i) => FeatureValue::Real(txn.attributes.get(i).copied().unwrap_or(0.0)),
            ColumnKind::RowFlag => FeatureValue::UInt(flag.code() as u64),
            ColumnKind::SimpleCycleBin(k) => FeatureValue::UInt(cycle_bins[k]),
            ColumnKind::TemporalCycleBin(k) => FeatureValue::UInt(tcycle_bins[k]),
            ColumnKind::ScatterGatherBin(k) => FeatureValue::UInt(sg_bins[k]),
            ColumnKind::FanIn(Endpoint::Source) => FeatureValue::UInt(report.src_fan_in),
            ColumnKind::FanIn(Endpoint::Target) => FeatureValue::UInt(report.dst_fan_in),
            ColumnKind::FanOut(Endpoint::Source) => FeatureValue::UInt(report.src_fan_out),
            ColumnKind::FanOut(Endpoint::Target) => FeatureValue::UInt(report.dst_fan_out),
            ColumnKind::GatherScatter(Endpoint::Source) => FeatureValue::UInt(report.gather_scatter_src as u64),
            ColumnKind::GatherScatter(Endpoint::Target) => FeatureValue::UInt(report.gather_scatter_dst as u64),
            ColumnKind::Stat(ep, slot) => {
                let v = stats_of(ep).get(slot).copied().flatten().unwrap_or(0.0);
                FeatureValue::Real(if v.is_finite() { v } else { 0.0 })
            }
            ColumnKind::StatPresent(ep, slot) => {
                FeatureValue::UInt(stats_of(ep).get(slot).copied().flatten().is_some() as u64)
            }
        })
        .collect();
    FeatureRow { edge_id: txn.edge_id, values }
}
