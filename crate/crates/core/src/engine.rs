//! Batch-oriented engine: configuration, ingestion and feature rows.
//!
//! A batch is processed in three steps. Rows are validated and every valid,
//! in-window row is inserted (in timestamp order, ties by input order) with
//! its statistics. Expired edges are then evicted once. Finally every row is
//! mined and encoded against the resulting state, on the worker pool, and the
//! rows come back in input order.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::encode::{encode, BinSpecs, FeatureRow, FeatureSchema};
use crate::error::{ConfigError, Error};
use crate::graph::{EdgeRecord, GraphStore, WindowConfig};
use crate::par::Executor;
use crate::pattern::{mine_edge, CycleConstraint, MiningConfig, PatternReport, PatternToggles, PatternWindows, Trigger};
use crate::stats::{MomentAccumulator, Stat, StatConfig, StatSource, VertexStats};
use crate::types::{Direction, EdgeId, RowFlag, Timestamp, Transaction, VertexId};

/// Input column names for each role.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default, deny_unknown_fields))]
pub struct InputSchema {
    pub edge_id: String,
    pub source: String,
    pub target: String,
    pub timestamp: String,
    pub attributes: Vec<String>,
}

impl Default for InputSchema {
    fn default() -> Self {
        InputSchema {
            edge_id: "EdgeID".into(),
            source: "SourceAccountId".into(),
            target: "DestAccountId".into(),
            timestamp: "Timestamp".into(),
            attributes: vec!["Amount".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default, deny_unknown_fields))]
pub struct EngineConfig {
    pub window: WindowConfig,
    pub patterns: PatternWindows,
    pub cycles: CycleConstraint,
    pub toggles: PatternToggles,
    pub stats: StatConfig,
    pub bins: BinSpecs,
    pub schema: InputSchema,
    pub worker_count: usize,
    /// Drop the raw account ids from output rows.
    pub exclude_account_ids: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            window: WindowConfig::default(),
            patterns: PatternWindows::default(),
            cycles: CycleConstraint::default(),
            toggles: PatternToggles::default(),
            stats: StatConfig::default(),
            bins: BinSpecs::default(),
            schema: InputSchema::default(),
            worker_count: 1,
            exclude_account_ids: true,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let delta = self.window.delta;
        if delta <= 0 {
            return Err(ConfigError::NonPositiveRetention(delta));
        }
        let p = &self.patterns;
        let windows = [
            ("scatter_gather", Some(p.scatter_gather)),
            ("simple_cycle", Some(p.simple_cycle)),
            ("temporal_cycle", Some(p.temporal_cycle)),
            ("fan", p.fan),
        ];
        for (name, value) in windows {
            if let Some(value) = value {
                if !(0..=delta).contains(&value) {
                    return Err(ConfigError::PatternWindow { name, value, retention: delta });
                }
            }
        }
        if self.cycles.max_length < 2 {
            return Err(ConfigError::CycleLength(self.cycles.max_length));
        }
        if let Some(m) = self.cycles.temporal_max_length.filter(|&m| m < 2) {
            return Err(ConfigError::TemporalCycleLength(m));
        }
        if self.worker_count == 0 {
            return Err(ConfigError::ZeroWorkers);
        }
        self.bins.simple_cycles.validate("simple_cycles")?;
        self.bins.temporal_cycles.validate("temporal_cycles")?;
        self.bins.scatter_gather.validate("scatter_gather")?;
        let s = &self.schema;
        for (role, name) in [("edge_id", &s.edge_id), ("source", &s.source), ("target", &s.target), ("timestamp", &s.timestamp)] {
            if name.is_empty() {
                return Err(ConfigError::EmptyRole(role));
            }
        }
        if s.attributes.iter().any(String::is_empty) {
            return Err(ConfigError::EmptyRole("attributes"));
        }
        if !self.stats.enabled.is_empty() && self.stats.attributes.is_empty() {
            return Err(ConfigError::NoStatAttributes);
        }
        self.stat_sources()?;
        Ok(())
    }

    /// Resolves statistics attribute names against the input schema.
    pub fn stat_sources(&self) -> Result<Vec<StatSource>, ConfigError> {
        if !self.stats.is_active() {
            return Ok(Vec::new());
        }
        self.stats
            .attributes
            .iter()
            .map(|name| {
                if let Some(i) = self.schema.attributes.iter().position(|a| a == name) {
                    Ok(StatSource::Attribute(i))
                } else if *name == self.schema.timestamp {
                    Ok(StatSource::Timestamp)
                } else {
                    Err(ConfigError::UnknownStatAttribute(name.clone()))
                }
            })
            .collect()
    }

    fn mining(&self) -> MiningConfig {
        MiningConfig { windows: self.patterns, cycles: self.cycles, toggles: self.toggles }
    }
}

/// Encoded rows of one `transform` call, in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformOutput {
    pub rows: Vec<FeatureRow>,
    pub flags: Vec<RowFlag>,
}

impl TransformOutput {
    pub fn count(&self, flag: RowFlag) -> usize {
        self.flags.iter().filter(|&&f| f == flag).count()
    }
}

/// Everything needed to resume an engine. Edges are in log order.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EngineSnapshot {
    pub config: EngineConfig,
    pub fitted: bool,
    pub t_now: Option<Timestamp>,
    pub accounts: Vec<String>,
    pub edges: Vec<SnapshotEdge>,
    /// Ascending.
    pub seen: Vec<EdgeId>,
    pub accumulators: Vec<MomentAccumulator>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SnapshotEdge {
    pub edge_id: EdgeId,
    pub source: VertexId,
    pub target: VertexId,
    pub timestamp: Timestamp,
    pub attributes: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Engine {
    config: EngineConfig,
    schema: FeatureSchema,
    graph: GraphStore,
    stats: VertexStats,
    exec: Executor,
    fitted: bool,
}

impl Engine {
    pub fn new(config: EngineConfig) -> Result<Self, Error> {
        let schema = FeatureSchema::build(&config)?;
        let sources = config.stat_sources()?;
        Ok(Engine {
            graph: GraphStore::new(config.window),
            stats: VertexStats::new(sources),
            exec: Executor::new(config.worker_count),
            schema,
            config,
            fitted: false,
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn get_params(&self) -> EngineConfig {
        self.config.clone()
    }

    /// Replaces the configuration. Only allowed before `fit` or after `reset`.
    pub fn set_params(&mut self, config: EngineConfig) -> Result<(), Error> {
        if self.fitted {
            return Err(ConfigError::AlreadyFitted.into());
        }
        *self = Engine::new(config)?;
        Ok(())
    }

    /// Changes the worker pool size. Outputs do not depend on it, so this
    /// is allowed at any time.
    pub fn set_worker_count(&mut self, workers: usize) -> Result<(), Error> {
        if workers == 0 {
            return Err(ConfigError::ZeroWorkers.into());
        }
        self.config.worker_count = workers;
        self.exec = Executor::new(workers);
        Ok(())
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn graph(&self) -> &GraphStore {
        &self.graph
    }

    pub fn vertex_stats(&self) -> &VertexStats {
        &self.stats
    }

    pub fn is_fitted(&self) -> bool {
        self.fitted
    }

    /// Drops all state, keeping the configuration.
    pub fn reset(&mut self) {
        self.graph = GraphStore::new(self.config.window);
        self.stats = VertexStats::new(self.stats.sources().to_vec());
        self.fitted = false;
    }

    /// Resets, then ingests `history` without producing rows.
    pub fn fit(&mut self, history: Vec<Transaction>) -> Result<Vec<RowFlag>, Error> {
        self.reset();
        self.partial_fit(history)
    }

    /// Ingests a batch without producing rows. Returns one flag per row.
    pub fn partial_fit(&mut self, batch: Vec<Transaction>) -> Result<Vec<RowFlag>, Error> {
        let (flags, _) = self.ingest(&batch)?;
        self.fitted = true;
        Ok(flags)
    }

    /// Ingests a batch and returns one feature row per input row.
    pub fn transform(&mut self, batch: Vec<Transaction>) -> Result<TransformOutput, Error> {
        let (flags, ends) = self.ingest(&batch)?;
        self.fitted = true;
        let items: Vec<(usize, Option<(VertexId, VertexId)>)> = ends.into_iter().enumerate().collect();
        let mining = self.config.mining();
        let (graph, stats, schema, config) = (&self.graph, &self.stats, &self.schema, &self.config);
        let rows = self.exec.map_ordered(&items, |&(i, ends)| {
            let txn = &batch[i];
            let slots = schema.stat_slots();
            let Some((s, d)) = ends else {
                let nulls = vec![None; slots.len()];
                return encode(schema, config, txn, flags[i], &PatternReport::default(), &nulls, &nulls);
            };
            let trigger = Trigger { edge_id: txn.edge_id, source: s, target: d, timestamp: txn.timestamp };
            let report = mine_edge(graph, &trigger, &mining);
            let src = account_stats(graph, stats, s, slots);
            let dst = account_stats(graph, stats, d, slots);
            encode(schema, config, txn, flags[i], &report, &src, &dst)
        });
        Ok(TransformOutput { rows, flags })
    }

    /// Validates and inserts a batch, then evicts. Returns per-row flags and
    /// the endpoints of every non-error row.
    #[allow(clippy::type_complexity)]
    fn ingest(&mut self, batch: &[Transaction]) -> Result<(Vec<RowFlag>, Vec<Option<(VertexId, VertexId)>>), Error> {
        let expected = self.config.schema.attributes.len();
        if let Some((row, t)) = batch.iter().enumerate().find(|(_, t)| t.attributes.len() != expected) {
            return Err(Error::SchemaMismatch { row, expected, found: t.attributes.len() });
        }
        let mut flags = vec![RowFlag::Ok; batch.len()];
        let mut ends = vec![None; batch.len()];
        for (f, t) in flags.iter_mut().zip(batch) {
            if t.timestamp < 0 {
                *f = RowFlag::NegativeTimestamp;
            } else if t.attributes.iter().any(|x| !x.is_finite()) {
                *f = RowFlag::NonFiniteAttribute;
            }
        }
        let mut order: Vec<usize> = (0..batch.len()).filter(|&i| flags[i] == RowFlag::Ok).collect();
        order.sort_by_key(|&i| batch[i].timestamp);

        if let (Some(&first), Some(now)) = (order.first(), self.graph.t_now()) {
            if batch[first].timestamp < now {
                log::warn!(
                    "batch starts at {} before the latest ingested timestamp {now}",
                    batch[first].timestamp
                );
            }
        }

        let mut values = Vec::with_capacity(self.stats.attribute_count());
        for i in order {
            let t = &batch[i];
            if self.graph.has_seen(t.edge_id) {
                flags[i] = RowFlag::DuplicateEdgeId;
                continue;
            }
            if self.graph.is_outdated(t.timestamp) {
                flags[i] = RowFlag::Stale;
                self.graph.register_edge_id(t.edge_id);
                let s = self.graph.intern_account(&t.source);
                let d = self.graph.intern_account(&t.target);
                ends[i] = Some((s, d));
                continue;
            }
            let (s, d) = self.graph.insert(t)?;
            self.stats.values_of(t.timestamp, &t.attributes, &mut values);
            self.stats.on_insert(s, Direction::Out, &values)?;
            self.stats.on_insert(d, Direction::In, &values)?;
            ends[i] = Some((s, d));
        }
        self.evict()?;
        Ok((flags, ends))
    }

    fn evict(&mut self) -> Result<(), Error> {
        let evicted = self.graph.evict_outdated();
        if self.stats.attribute_count() == 0 {
            return Ok(());
        }
        let mut values = Vec::with_capacity(self.stats.attribute_count());
        let mut rebuild = Vec::new();
        for rec in &evicted {
            self.stats.values_of(rec.timestamp, &rec.attributes, &mut values);
            for (v, dir) in [(rec.source, Direction::Out), (rec.target, Direction::In)] {
                rebuild.extend(self.stats.on_remove(v, dir, &values)?.into_iter().map(|a| (v, dir, a)));
            }
        }
        // the graph already reflects every eviction, so rebuild only after
        // all removals have been applied
        rebuild.sort_unstable_by_key(|&(v, dir, a)| (v, dir as u8, a));
        rebuild.dedup();
        for (v, dir, a) in rebuild {
            self.stats.rebuild_from_graph(&self.graph, v, dir, a);
        }
        Ok(())
    }

    pub fn snapshot(&self) -> EngineSnapshot {
        let mut seen: Vec<EdgeId> = self.graph.seen_edge_ids().collect();
        seen.sort_unstable();
        EngineSnapshot {
            config: self.config.clone(),
            fitted: self.fitted,
            t_now: self.graph.t_now(),
            accounts: self.graph.account_keys().to_vec(),
            edges: self
                .graph
                .edges()
                .map(|r| SnapshotEdge {
                    edge_id: r.edge_id,
                    source: r.source,
                    target: r.target,
                    timestamp: r.timestamp,
                    attributes: r.attributes.to_vec(),
                })
                .collect(),
            seen,
            accumulators: self.stats.raw().to_vec(),
        }
    }

    /// Rebuilds an engine from a snapshot, checking it for consistency.
    pub fn restore(snapshot: EngineSnapshot) -> Result<Self, Error> {
        let mut engine = Engine::new(snapshot.config)?;
        let expected = engine.config.schema.attributes.len();
        if snapshot.edges.iter().any(|e| e.attributes.len() != expected) {
            return Err(Error::Snapshot("edge attribute count does not match the schema"));
        }
        let k = engine.stats.attribute_count();
        if snapshot.accumulators.len() > snapshot.accounts.len() * 2 * k
            || (k > 0 && snapshot.accumulators.len() % (2 * k) != 0)
        {
            return Err(Error::Snapshot("accumulator table does not match the accounts"));
        }
        let edges = snapshot
            .edges
            .into_iter()
            .map(|e| EdgeRecord {
                edge_id: e.edge_id,
                source: e.source,
                target: e.target,
                timestamp: e.timestamp,
                attributes: e.attributes.into_boxed_slice(),
            })
            .collect();
        engine.graph = GraphStore::restore(engine.config.window, snapshot.accounts, edges, snapshot.seen, snapshot.t_now)
            .map_err(Error::Snapshot)?;
        let sources = engine.stats.sources().to_vec();
        engine.stats = VertexStats::from_raw(sources, snapshot.accumulators);
        if k > 0 {
            for v in 0..engine.graph.vertex_count() as u32 {
                for dir in Direction::BOTH {
                    let live = engine.graph.incident_edges(VertexId(v), dir).count() as u64;
                    for a in 0..k {
                        if engine.stats.accumulator(VertexId(v), dir, a).n != live {
                            return Err(Error::Snapshot("accumulator count differs from live edges"));
                        }
                    }
                }
            }
        }
        engine.fitted = snapshot.fitted;
        Ok(engine)
    }
}

fn account_stats(
    graph: &GraphStore,
    stats: &VertexStats,
    v: VertexId,
    slots: &[(Direction, usize, Stat)],
) -> Vec<Option<f64>> {
    let mut out = Vec::with_capacity(slots.len());
    let mut scratch = Vec::new();
    // slots are grouped by (direction, attribute)
    let mut i = 0;
    while i < slots.len() {
        let (dir, a, _) = slots[i];
        let mut j = i;
        while j < slots.len() && slots[j].0 == dir && slots[j].1 == a {
            j += 1;
        }
        let group: Vec<Stat> = slots[i..j].iter().map(|s| s.2).collect();
        stats.query_many(graph, v, dir, a, &group, &mut scratch, &mut out);
        i = j;
    }
    out
}
