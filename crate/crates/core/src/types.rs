use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Seconds (or any fixed integer unit) since an arbitrary epoch.
pub type Timestamp = i64;

/// Caller-supplied transaction identifier, unique over the engine's lifetime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(transparent))]
pub struct EdgeId(pub u64);

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Dense internal account index. Never recycled within a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(transparent))]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    In,
    Out,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::In, Direction::Out];

    pub fn name(self) -> &'static str {
        match self {
            Direction::In => "in",
            Direction::Out => "out",
        }
    }
}

/// One input edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Transaction {
    pub edge_id: EdgeId,
    pub source: String,
    pub target: String,
    pub timestamp: Timestamp,
    /// Values aligned with [`InputSchema::attributes`](crate::InputSchema::attributes).
    pub attributes: Vec<f64>,
}

impl Transaction {
    pub fn new(
        edge_id: u64,
        source: impl Into<String>,
        target: impl Into<String>,
        timestamp: Timestamp,
        attributes: Vec<f64>,
    ) -> Self {
        Transaction {
            edge_id: EdgeId(edge_id),
            source: source.into(),
            target: target.into(),
            timestamp,
            attributes,
        }
    }
}

/// Per-row outcome, emitted as the `row_flag` column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RowFlag {
    #[default]
    Ok,
    /// Older than `t_now - delta`: scored against the current graph but not inserted.
    Stale,
    DuplicateEdgeId,
    NegativeTimestamp,
    NonFiniteAttribute,
}

impl RowFlag {
    pub fn code(self) -> u8 {
        match self {
            RowFlag::Ok => 0,
            RowFlag::Stale => 1,
            RowFlag::DuplicateEdgeId => 2,
            RowFlag::NegativeTimestamp => 3,
            RowFlag::NonFiniteAttribute => 4,
        }
    }

    pub const ALL: [RowFlag; 5] =
        [RowFlag::Ok, RowFlag::Stale, RowFlag::DuplicateEdgeId, RowFlag::NegativeTimestamp, RowFlag::NonFiniteAttribute];

    pub fn name(self) -> &'static str {
        match self {
            RowFlag::Ok => "ok",
            RowFlag::Stale => "stale",
            RowFlag::DuplicateEdgeId => "duplicate_edge_id",
            RowFlag::NegativeTimestamp => "negative_timestamp",
            RowFlag::NonFiniteAttribute => "non_finite_attribute",
        }
    }

    /// Rows that never reach the graph and get no graph features.
    pub fn is_error(self) -> bool {
        !matches!(self, RowFlag::Ok | RowFlag::Stale)
    }
}

/// Multiset of pattern sizes, stored as size -> multiplicity.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LengthHistogram(BTreeMap<u32, u64>);

impl LengthHistogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, size: u32, count: u64) {
        if count > 0 {
            *self.0.entry(size).or_insert(0) += count;
        }
    }

    pub fn merge(&mut self, other: &LengthHistogram) {
        for (&k, &c) in &other.0 {
            self.add(k, c);
        }
    }

    pub fn count(&self, size: u32) -> u64 {
        self.0.get(&size).copied().unwrap_or(0)
    }

    /// Cardinality of the multiset.
    pub fn total(&self) -> u64 {
        self.0.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.0.iter().map(|(&k, &c)| (k, c))
    }

    pub fn max_size(&self) -> Option<u32> {
        self.0.keys().next_back().copied()
    }
}

impl FromIterator<u32> for LengthHistogram {
    fn from_iter<I: IntoIterator<Item = u32>>(iter: I) -> Self {
        let mut h = LengthHistogram::new();
        for s in iter {
            h.add(s, 1);
        }
        h
    }
}
