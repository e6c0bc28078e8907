//! Sliding-window temporal multigraph.
//!
//! Edges live in two places: a transaction log ordered by timestamp (oldest at
//! the front, so eviction is a `pop_front`) and a per-vertex adjacency index
//! holding one neighbour map per direction. Each neighbour entry carries the
//! parallel-edge list for that ordered vertex pair, again ordered by
//! timestamp. Equal timestamps keep insertion order everywhere.

use alloc::boxed::Box;
use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::GraphError;
use crate::types::{Direction, EdgeId, Timestamp, Transaction, VertexId};
use crate::{FxHashMap, FxHashSet};

/// Retention window: live edges satisfy `t >= t_now - delta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default, deny_unknown_fields))]
pub struct WindowConfig {
    pub delta: i64,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig { delta: 86_400 }
    }
}

/// Closed time interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeWindow {
    pub lo: Timestamp,
    pub hi: Timestamp,
}

impl TimeWindow {
    /// `[anchor - width, anchor]`.
    pub fn ending_at(anchor: Timestamp, width: i64) -> Self {
        TimeWindow { lo: anchor.saturating_sub(width), hi: anchor }
    }

    pub const UNBOUNDED: TimeWindow = TimeWindow { lo: Timestamp::MIN, hi: Timestamp::MAX };

    #[inline]
    pub fn contains(&self, t: Timestamp) -> bool {
        self.lo <= t && t <= self.hi
    }
}

/// A live edge as stored in the slab.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRecord {
    pub edge_id: EdgeId,
    pub source: VertexId,
    pub target: VertexId,
    pub timestamp: Timestamp,
    pub attributes: Box<[f64]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct EdgeRef {
    slot: u32,
    timestamp: Timestamp,
}

/// Timestamp-ordered edges between one ordered vertex pair.
#[derive(Debug, Clone, Default)]
pub struct ParallelEdgeList {
    edges: VecDeque<EdgeRef>,
}

impl ParallelEdgeList {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    fn push(&mut self, e: EdgeRef) {
        match self.edges.back() {
            Some(last) if last.timestamp > e.timestamp => {
                let at = self.edges.partition_point(|x| x.timestamp <= e.timestamp);
                self.edges.insert(at, e);
            }
            _ => self.edges.push_back(e),
        }
    }

    fn remove(&mut self, slot: u32) {
        if self.edges.front().map(|e| e.slot) == Some(slot) {
            self.edges.pop_front();
        } else if let Some(at) = self.edges.iter().position(|e| e.slot == slot) {
            self.edges.remove(at);
        }
    }

    /// Index range of edges with `lo <= t <= hi`.
    #[inline]
    fn range(&self, w: TimeWindow) -> (usize, usize) {
        if w == TimeWindow::UNBOUNDED {
            return (0, self.edges.len());
        }
        let start = self.edges.partition_point(|e| e.timestamp < w.lo);
        let end = self.edges.partition_point(|e| e.timestamp <= w.hi);
        (start, end.max(start))
    }

    /// Number of parallel edges inside `w`.
    #[inline]
    pub fn count_in(&self, w: TimeWindow) -> usize {
        let (s, e) = self.range(w);
        e - s
    }

    #[inline]
    pub fn any_in(&self, w: TimeWindow) -> bool {
        self.count_in(w) > 0
    }

    /// Timestamps inside `w`, ascending.
    pub fn timestamps_in(&self, w: TimeWindow) -> impl Iterator<Item = Timestamp> + '_ {
        let (s, e) = self.range(w);
        self.edges.range(s..e).map(|e| e.timestamp)
    }

    /// Largest timestamp inside `w`.
    pub fn latest_in(&self, w: TimeWindow) -> Option<Timestamp> {
        let (s, e) = self.range(w);
        (e > s).then(|| self.edges[e - 1].timestamp)
    }

    pub fn timestamps(&self) -> impl Iterator<Item = Timestamp> + '_ {
        self.edges.iter().map(|e| e.timestamp)
    }
}

pub type NeighborMap = FxHashMap<VertexId, ParallelEdgeList>;

#[derive(Debug, Clone, Default)]
struct VertexAdjacency {
    out: NeighborMap,
    inc: NeighborMap,
}

/// Edge returned by [`GraphStore::evict_outdated`].
pub type EvictedEdge = EdgeRecord;

/// Windowed temporal multigraph. Single writer; queries take `&self`.
#[derive(Debug, Clone)]
pub struct GraphStore {
    window: WindowConfig,
    ids: FxHashMap<String, VertexId>,
    keys: Vec<String>,
    adjacency: Vec<VertexAdjacency>,
    log: VecDeque<(Timestamp, u32)>,
    slab: Vec<Option<EdgeRecord>>,
    free: Vec<u32>,
    t_now: Option<Timestamp>,
    seen: FxHashSet<EdgeId>,
}

impl GraphStore {
    pub fn new(window: WindowConfig) -> Self {
        GraphStore {
            window,
            ids: FxHashMap::default(),
            keys: Vec::new(),
            adjacency: Vec::new(),
            log: VecDeque::new(),
            slab: Vec::new(),
            free: Vec::new(),
            t_now: None,
            seen: FxHashSet::default(),
        }
    }

    pub fn window(&self) -> WindowConfig {
        self.window
    }

    /// Largest timestamp ever inserted.
    pub fn t_now(&self) -> Option<Timestamp> {
        self.t_now
    }

    /// Oldest timestamp still admissible, `t_now - delta`.
    pub fn horizon(&self) -> Option<Timestamp> {
        self.t_now.map(|t| t.saturating_sub(self.window.delta))
    }

    pub fn is_outdated(&self, t: Timestamp) -> bool {
        self.horizon().is_some_and(|h| t < h)
    }

    pub fn edge_count(&self) -> usize {
        self.log.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.keys.len()
    }

    pub fn vertex_id(&self, key: &str) -> Option<VertexId> {
        self.ids.get(key).copied()
    }

    pub fn account_key(&self, v: VertexId) -> Option<&str> {
        self.keys.get(v.index()).map(String::as_str)
    }

    pub fn account_keys(&self) -> &[String] {
        &self.keys
    }

    pub fn has_seen(&self, id: EdgeId) -> bool {
        self.seen.contains(&id)
    }

    /// Records `id` as used without inserting an edge. Returns `false` if it
    /// was already taken.
    pub fn register_edge_id(&mut self, id: EdgeId) -> bool {
        self.seen.insert(id)
    }

    pub fn seen_edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.seen.iter().copied()
    }

    fn intern(&mut self, key: &str) -> VertexId {
        if let Some(&v) = self.ids.get(key) {
            return v;
        }
        let v = VertexId(self.keys.len() as u32);
        self.keys.push(String::from(key));
        self.ids.insert(String::from(key), v);
        self.adjacency.push(VertexAdjacency::default());
        v
    }

    /// Adds `key` to the dictionary if it is new.
    pub fn intern_account(&mut self, key: &str) -> VertexId {
        self.intern(key)
    }

    pub fn insert(&mut self, txn: &Transaction) -> Result<(VertexId, VertexId), GraphError> {
        self.insert_parts(txn.edge_id, &txn.source, &txn.target, txn.timestamp, &txn.attributes)
    }

    /// Inserts one edge. Edges older than the current horizon are rejected;
    /// an edge older than `t_now` but inside the window is placed in order.
    pub fn insert_parts(
        &mut self,
        edge_id: EdgeId,
        source: &str,
        target: &str,
        timestamp: Timestamp,
        attributes: &[f64],
    ) -> Result<(VertexId, VertexId), GraphError> {
        if timestamp < 0 {
            return Err(GraphError::NegativeTimestamp(edge_id, timestamp));
        }
        if self.seen.contains(&edge_id) {
            return Err(GraphError::DuplicateEdge(edge_id));
        }
        if self.is_outdated(timestamp) {
            return Err(GraphError::Outdated(edge_id, timestamp));
        }
        self.seen.insert(edge_id);
        let src = self.intern(source);
        let dst = self.intern(target);
        self.link(EdgeRecord {
            edge_id,
            source: src,
            target: dst,
            timestamp,
            attributes: attributes.into(),
        });
        Ok((src, dst))
    }

    fn link(&mut self, rec: EdgeRecord) {
        let (src, dst, ts) = (rec.source, rec.target, rec.timestamp);
        let slot = match self.free.pop() {
            Some(s) => {
                self.slab[s as usize] = Some(rec);
                s
            }
            None => {
                self.slab.push(Some(rec));
                (self.slab.len() - 1) as u32
            }
        };
        match self.log.back() {
            Some(&(last, _)) if last > ts => {
                let at = self.log.partition_point(|&(t, _)| t <= ts);
                self.log.insert(at, (ts, slot));
            }
            _ => self.log.push_back((ts, slot)),
        }
        let r = EdgeRef { slot, timestamp: ts };
        self.adjacency[src.index()].out.entry(dst).or_default().push(r);
        self.adjacency[dst.index()].inc.entry(src).or_default().push(r);
        self.t_now = Some(self.t_now.map_or(ts, |t| t.max(ts)));
    }

    fn unlink(&mut self, slot: u32) -> EdgeRecord {
        let rec = self.slab[slot as usize].take().expect("log points at a live slot");
        self.free.push(slot);
        let (src, dst) = (rec.source, rec.target);
        detach(&mut self.adjacency[src.index()].out, dst, slot);
        detach(&mut self.adjacency[dst.index()].inc, src, slot);
        rec
    }

    /// Removes every edge older than `t_now - delta`, oldest first.
    pub fn evict_outdated(&mut self) -> Vec<EvictedEdge> {
        let mut evicted = Vec::new();
        let Some(horizon) = self.horizon() else {
            return evicted;
        };
        while let Some(&(ts, slot)) = self.log.front() {
            if ts >= horizon {
                break;
            }
            self.log.pop_front();
            evicted.push(self.unlink(slot));
        }
        evicted
    }

    fn check(&self, v: VertexId) -> Result<&VertexAdjacency, GraphError> {
        self.adjacency.get(v.index()).ok_or(GraphError::UnknownVertex(v))
    }

    /// Neighbour map of `v` in direction `dir` (keys are distinct neighbours).
    pub fn neighbor_map(&self, v: VertexId, dir: Direction) -> Result<&NeighborMap, GraphError> {
        let adj = self.check(v)?;
        Ok(match dir {
            Direction::Out => &adj.out,
            Direction::In => &adj.inc,
        })
    }

    /// Like [`neighbor_map`](Self::neighbor_map) but returns `None` for unknown ids.
    #[inline]
    pub(crate) fn map_of(&self, v: VertexId, dir: Direction) -> Option<&NeighborMap> {
        self.adjacency.get(v.index()).map(|adj| match dir {
            Direction::Out => &adj.out,
            Direction::In => &adj.inc,
        })
    }

    /// Distinct neighbours with at least one parallel edge in `w`, ascending.
    pub fn neighbors_in_window(
        &self,
        v: VertexId,
        dir: Direction,
        w: TimeWindow,
    ) -> Result<Vec<VertexId>, GraphError> {
        let map = self.neighbor_map(v, dir)?;
        let mut out: Vec<VertexId> = map
            .iter()
            .filter(|(_, list)| list.any_in(w))
            .map(|(&x, _)| x)
            .collect();
        out.sort_unstable();
        Ok(out)
    }

    fn neighbors_opt(
        &self,
        v: VertexId,
        dir: Direction,
        window: Option<i64>,
        anchor: Option<Timestamp>,
    ) -> Result<Vec<VertexId>, GraphError> {
        let w = match (window, anchor) {
            (Some(width), Some(a)) => TimeWindow::ending_at(a, width),
            (Some(_), None) => return Err(GraphError::WindowWithoutAnchor),
            (None, _) => TimeWindow::UNBOUNDED,
        };
        self.neighbors_in_window(v, dir, w)
    }

    /// Distinct out-neighbours, optionally restricted to `[anchor - window, anchor]`.
    pub fn out_neighbors(
        &self,
        v: VertexId,
        window: Option<i64>,
        anchor: Option<Timestamp>,
    ) -> Result<Vec<VertexId>, GraphError> {
        self.neighbors_opt(v, Direction::Out, window, anchor)
    }

    /// Distinct in-neighbours, optionally restricted to `[anchor - window, anchor]`.
    pub fn in_neighbors(
        &self,
        v: VertexId,
        window: Option<i64>,
        anchor: Option<Timestamp>,
    ) -> Result<Vec<VertexId>, GraphError> {
        self.neighbors_opt(v, Direction::In, window, anchor)
    }

    pub fn fan_out(&self, v: VertexId) -> Result<usize, GraphError> {
        Ok(self.check(v)?.out.len())
    }

    pub fn fan_in(&self, v: VertexId) -> Result<usize, GraphError> {
        Ok(self.check(v)?.inc.len())
    }

    /// Distinct neighbours in `dir` with an edge in `w` (an O(deg) scan).
    pub fn fan_in_window(&self, v: VertexId, dir: Direction, w: TimeWindow) -> Result<usize, GraphError> {
        Ok(self.neighbor_map(v, dir)?.values().filter(|l| l.any_in(w)).count())
    }

    /// Edges `u -> v`, timestamp ascending.
    pub fn parallel_edges(&self, u: VertexId, v: VertexId) -> Result<Vec<(EdgeId, Timestamp)>, GraphError> {
        self.check(v)?;
        let Some(list) = self.check(u)?.out.get(&v) else {
            return Ok(Vec::new());
        };
        Ok(list
            .edges
            .iter()
            .map(|e| (self.record(e.slot).edge_id, e.timestamp))
            .collect())
    }

    #[inline]
    fn record(&self, slot: u32) -> &EdgeRecord {
        self.slab[slot as usize].as_ref().expect("index points at a live slot")
    }

    /// Live edges in log order (timestamp ascending, ties by insertion).
    pub fn edges(&self) -> impl Iterator<Item = &EdgeRecord> + '_ {
        self.log.iter().map(move |&(_, slot)| self.record(slot))
    }

    /// Live edges incident to `v`: outgoing edges for [`Direction::Out`],
    /// incoming for [`Direction::In`].
    pub fn incident_edges(&self, v: VertexId, dir: Direction) -> impl Iterator<Item = &EdgeRecord> + '_ {
        self.map_of(v, dir)
            .into_iter()
            .flat_map(|m| m.values())
            .flat_map(|l| l.edges.iter())
            .map(move |e| self.record(e.slot))
    }

    /// Exhaustive consistency check of log and index. Intended for tests and
    /// debugging; cost is linear in the graph size.
    pub fn audit(&self) -> Result<(), &'static str> {
        let mut prev = Timestamp::MIN;
        let mut live = FxHashSet::default();
        for &(ts, slot) in &self.log {
            if ts < prev {
                return Err("log timestamps decrease");
            }
            prev = ts;
            let rec = self.slab.get(slot as usize).and_then(Option::as_ref).ok_or("log slot is empty")?;
            if rec.timestamp != ts {
                return Err("log timestamp differs from record");
            }
            if !live.insert(slot) {
                return Err("slot appears twice in log");
            }
        }
        if let (Some(h), Some(&(front, _))) = (self.horizon(), self.log.front()) {
            if front < h {
                return Err("live edge older than horizon");
            }
        }
        if let (Some(t), Some(&(back, _))) = (self.t_now, self.log.back()) {
            if back > t {
                return Err("live edge newer than t_now");
            }
        }
        let mut out_total = 0usize;
        let mut in_total = 0usize;
        for (vi, adj) in self.adjacency.iter().enumerate() {
            let v = VertexId(vi as u32);
            for (&x, list) in &adj.out {
                if list.is_empty() {
                    return Err("empty parallel edge list kept");
                }
                let back = self.adjacency[x.index()].inc.get(&v).ok_or("out entry without in entry")?;
                if back.edges != list.edges {
                    return Err("out and in parallel lists differ");
                }
                let mut prev = Timestamp::MIN;
                for e in &list.edges {
                    if e.timestamp < prev {
                        return Err("parallel list out of order");
                    }
                    prev = e.timestamp;
                    if !live.contains(&e.slot) {
                        return Err("index references an edge missing from the log");
                    }
                    let rec = self.record(e.slot);
                    if rec.source != v || rec.target != x {
                        return Err("index entry under wrong endpoints");
                    }
                }
                out_total += list.len();
            }
            for (&x, list) in &adj.inc {
                if list.is_empty() {
                    return Err("empty parallel edge list kept");
                }
                if !self.adjacency[x.index()].out.contains_key(&v) {
                    return Err("in entry without out entry");
                }
                in_total += list.len();
            }
        }
        if out_total != self.log.len() || in_total != self.log.len() {
            return Err("index edge count differs from log length");
        }
        if self.ids.len() != self.keys.len() || self.adjacency.len() != self.keys.len() {
            return Err("id dictionary out of sync");
        }
        Ok(())
    }

    /// Rebuilds a store from its parts, as produced by a snapshot. `edges`
    /// must be in log order.
    pub fn restore(
        window: WindowConfig,
        keys: Vec<String>,
        edges: Vec<EdgeRecord>,
        seen: impl IntoIterator<Item = EdgeId>,
        t_now: Option<Timestamp>,
    ) -> Result<Self, &'static str> {
        let mut g = GraphStore::new(window);
        for k in &keys {
            let before = g.keys.len();
            if g.intern(k).index() != before {
                return Err("duplicate account key");
            }
        }
        g.seen.extend(seen);
        for rec in edges {
            if rec.source.index() >= g.keys.len() || rec.target.index() >= g.keys.len() {
                return Err("edge references unknown vertex");
            }
            if !g.seen.contains(&rec.edge_id) {
                return Err("live edge id missing from seen set");
            }
            g.link(rec);
        }
        if let Some(t) = t_now {
            if g.t_now.is_some_and(|x| x > t) {
                return Err("t_now older than a live edge");
            }
            g.t_now = Some(t);
        }
        g.audit()?;
        Ok(g)
    }
}

fn detach(map: &mut NeighborMap, key: VertexId, slot: u32) {
    if let Some(list) = map.get_mut(&key) {
        list.remove(slot);
        if list.is_empty() {
            map.remove(&key);
        }
    }
}
