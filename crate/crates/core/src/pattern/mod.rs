//! Per-edge subgraph pattern mining.
//!
//! Every trigger edge `u -> v` at time `t` is mined against the current graph
//! with windows anchored at `t`: an edge takes part in a pattern only if its
//! timestamp lies in `[t - window, t]`. All batch edges are inserted before any
//! of them is mined, so edges of the same batch see each other.

mod cycles;
mod scatter_gather;
mod temporal;

use alloc::vec::Vec;

use crate::graph::{GraphStore, TimeWindow};
use crate::par::Executor;
use crate::types::{Direction, EdgeId, LengthHistogram, Timestamp, VertexId};

pub use cycles::simple_cycle_lengths;
pub use scatter_gather::scatter_gather_hits;
pub use temporal::temporal_cycle_lengths;

/// Per-pattern time windows, in timestamp units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default, deny_unknown_fields))]
pub struct PatternWindows {
    pub scatter_gather: i64,
    pub simple_cycle: i64,
    pub temporal_cycle: i64,
    /// Window for fan counts; `None` uses the whole retention window.
    pub fan: Option<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default, deny_unknown_fields))]
pub struct CycleConstraint {
    /// Longest simple cycle reported, in edges.
    pub max_length: u32,
    /// Optional hop bound for temporal cycles.
    pub temporal_max_length: Option<u32>,
}

/// Which pattern families are mined and encoded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default, deny_unknown_fields))]
pub struct PatternToggles {
    /// Fan-in, fan-out and the gather-scatter flag.
    pub fan: bool,
    pub scatter_gather: bool,
    pub simple_cycles: bool,
    pub temporal_cycles: bool,
}

impl Default for PatternWindows {
    fn default() -> Self {
        PatternWindows { scatter_gather: 21_600, simple_cycle: 86_400, temporal_cycle: 86_400, fan: None }
    }
}

impl Default for CycleConstraint {
    fn default() -> Self {
        CycleConstraint { max_length: 10, temporal_max_length: None }
    }
}

impl Default for PatternToggles {
    fn default() -> Self {
        PatternToggles { fan: true, scatter_gather: true, simple_cycles: true, temporal_cycles: true }
    }
}

/// Everything the miner needs besides the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MiningConfig {
    pub windows: PatternWindows,
    pub cycles: CycleConstraint,
    pub toggles: PatternToggles,
}

/// An edge to mine patterns for. The edge itself need not be in the graph
/// (stale rows are scored without being inserted); it is treated as present.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Trigger {
    pub edge_id: EdgeId,
    pub source: VertexId,
    pub target: VertexId,
    pub timestamp: Timestamp,
}

/// Source `u` fans out to every vertex of `intermediates`, each of which pays
/// into `sink`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScatterGatherHit {
    pub source: VertexId,
    /// Ascending, at least two vertices.
    pub intermediates: Vec<VertexId>,
    pub sink: VertexId,
    pub trigger_edge: EdgeId,
}

/// Mining result for one trigger edge.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PatternReport {
    pub simple_cycle_lengths: LengthHistogram,
    pub temporal_cycle_lengths: LengthHistogram,
    /// One entry `|I|` per scatter-gather hit.
    pub sg_intermediate_sizes: LengthHistogram,
    pub src_fan_in: u64,
    pub src_fan_out: u64,
    pub dst_fan_in: u64,
    pub dst_fan_out: u64,
    pub gather_scatter_src: bool,
    pub gather_scatter_dst: bool,
}

/// Fan-in and fan-out of `v`: distinct in-/out-neighbours over the full
/// retention window, or over `[anchor - window, anchor]` when given.
pub fn fan_counts(graph: &GraphStore, v: VertexId, window: Option<i64>, anchor: Timestamp) -> (u64, u64) {
    let (Some(inc), Some(out)) = (graph.map_of(v, Direction::In), graph.map_of(v, Direction::Out)) else {
        return (0, 0);
    };
    match window {
        None => (inc.len() as u64, out.len() as u64),
        Some(width) => {
            let w = TimeWindow::ending_at(anchor, width);
            let count = |m: &crate::graph::NeighborMap| m.values().filter(|l| l.any_in(w)).count() as u64;
            (count(inc), count(out))
        }
    }
}

/// Gather-scatter holds when fan-in and fan-out are both at least two.
pub fn is_gather_scatter(fan_in: u64, fan_out: u64) -> bool {
    fan_in >= 2 && fan_out >= 2
}

/// Gather-scatter flag of `v` over the full retention window.
pub fn gather_scatter_flag(graph: &GraphStore, v: VertexId) -> bool {
    let (fi, fo) = fan_counts(graph, v, None, 0);
    is_gather_scatter(fi, fo)
}

/// Runs every enabled miner for one trigger edge.
pub fn mine_edge(graph: &GraphStore, trigger: &Trigger, cfg: &MiningConfig) -> PatternReport {
    let mut report = PatternReport::default();
    let t = trigger.timestamp;
    if cfg.toggles.fan {
        let (si, so) = fan_counts(graph, trigger.source, cfg.windows.fan, t);
        let (di, d_o) = fan_counts(graph, trigger.target, cfg.windows.fan, t);
        report.src_fan_in = si;
        report.src_fan_out = so;
        report.dst_fan_in = di;
        report.dst_fan_out = d_o;
        report.gather_scatter_src = is_gather_scatter(si, so);
        report.gather_scatter_dst = is_gather_scatter(di, d_o);
    }
    if cfg.toggles.scatter_gather {
        report.sg_intermediate_sizes = scatter_gather_hits(graph, trigger, cfg.windows.scatter_gather)
            .iter()
            .map(|h| h.intermediates.len() as u32)
            .collect();
    }
    if cfg.toggles.simple_cycles {
        report.simple_cycle_lengths =
            simple_cycle_lengths(graph, trigger, cfg.windows.simple_cycle, cfg.cycles.max_length);
    }
    if cfg.toggles.temporal_cycles {
        report.temporal_cycle_lengths = temporal_cycle_lengths(
            graph,
            trigger,
            cfg.windows.temporal_cycle,
            cfg.cycles.temporal_max_length,
        );
    }
    report
}

pub(crate) fn mine_batch_with(
    exec: &Executor,
    graph: &GraphStore,
    triggers: &[Trigger],
    cfg: &MiningConfig,
) -> Vec<PatternReport> {
    exec.map_ordered(triggers, |t| mine_edge(graph, t, cfg))
}

/// Mines every trigger on `workers` threads. One report per trigger, in
/// input order; the output does not depend on `workers`.
pub fn mine_batch(graph: &GraphStore, triggers: &[Trigger], cfg: &MiningConfig, workers: usize) -> Vec<PatternReport> {
    mine_batch_with(&Executor::new(workers.max(1)), graph, triggers, cfg)
}

/// Scatter-gather hits for every trigger, in input order.
pub fn scatter_gather_stream(graph: &GraphStore, triggers: &[Trigger], window: i64) -> Vec<Vec<ScatterGatherHit>> {
    triggers.iter().map(|t| scatter_gather_hits(graph, t, window)).collect()
}
