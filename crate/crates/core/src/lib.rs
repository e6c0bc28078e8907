//! Streaming transaction-graph feature extraction.
//!
//! `txmotif-core` keeps a sliding-window temporal multigraph of transactions
//! and enriches every incoming transaction with subgraph-pattern counts
//! (fan-in/out, gather-scatter, scatter-gather, hop-constrained simple cycles,
//! temporal cycles) and per-account running statistics. The result is one
//! flat, deterministically ordered feature row per transaction.
//!
//! The crate is `no_std` + `alloc` when built without the default `std`
//! feature. With `std` enabled, mining runs on a rayon pool sized by
//! [`EngineConfig::worker_count`]; output is identical for every worker count.
//!
//! ```
//! use txmotif_core::{Engine, EngineConfig, Transaction};
//!
//! let mut config = EngineConfig::default();
//! config.stats.attributes.clear();
//! config.stats.enabled.clear();
//! let mut engine = Engine::new(config).unwrap();
//! engine.fit(Vec::new()).unwrap();
//!
//! let batch = vec![
//!     Transaction::new(1, "a", "b", 10, vec![5.0]),
//!     Transaction::new(2, "b", "c", 11, vec![5.0]),
//!     Transaction::new(3, "c", "a", 12, vec![5.0]),
//! ];
//! let out = engine.transform(batch).unwrap();
//! let col = engine.schema().position("cycle_len_3").unwrap();
//! assert_eq!(out.rows[2].values[col].as_u64(), Some(1));
//! ```

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

mod dd;
mod error;
mod par;
mod types;

pub mod encode;
pub mod engine;
pub mod graph;
pub mod pattern;
pub mod stats;

#[cfg(any(test, feature = "oracle"))]
pub mod oracle;

pub use encode::{BinSpec, BinSpecs, ColumnKind, FeatureRow, FeatureSchema, FeatureValue};
pub use engine::{Engine, EngineConfig, EngineSnapshot, InputSchema, TransformOutput};
pub use error::{ConfigError, Error, GraphError, StatsError};
pub use graph::{GraphStore, WindowConfig};
pub use pattern::{CycleConstraint, PatternReport, PatternToggles, PatternWindows, ScatterGatherHit};
pub use stats::{MomentAccumulator, Stat, StatConfig, VertexStats};
pub use types::{Direction, EdgeId, LengthHistogram, RowFlag, Timestamp, Transaction, VertexId};

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) type FxHashMap<K, V> = hashbrown::HashMap<K, V, rustc_hash::FxBuildHasher>;
pub(crate) type FxHashSet<K> = hashbrown::HashSet<K, rustc_hash::FxBuildHasher>;
