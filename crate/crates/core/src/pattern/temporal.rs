use alloc::collections::BinaryHeap;
use alloc::vec::Vec;

use super::Trigger;
use crate::graph::{GraphStore, TimeWindow};
use crate::par::split_map;
use crate::types::{Direction, LengthHistogram, Timestamp, VertexId};
use crate::FxHashMap;

/// For every vertex `x`, the latest departure time from `x` that still reaches
/// `target` along strictly increasing timestamps, all in `[lo, deadline)`.
/// `target` itself maps to `deadline`. `start` is recorded but not expanded.
fn latest_departures(
    graph: &GraphStore,
    target: VertexId,
    start: VertexId,
    lo: Timestamp,
    deadline: Timestamp,
) -> FxHashMap<VertexId, Timestamp> {
    let mut best: FxHashMap<VertexId, Timestamp> = FxHashMap::default();
    best.insert(target, deadline);
    let mut heap = BinaryHeap::new();
    heap.push((deadline, target));
    while let Some((d, x)) = heap.pop() {
        if best.get(&x) != Some(&d) || x == start || d <= lo {
            continue;
        }
        let Some(inc) = graph.map_of(x, Direction::In) else { continue };
        let w = TimeWindow { lo, hi: d - 1 };
        for (&y, list) in inc {
            if y == target {
                continue;
            }
            let Some(s) = list.latest_in(w) else { continue };
            if best.get(&y).is_none_or(|&cur| s > cur) {
                best.insert(y, s);
                heap.push((s, y));
            }
        }
    }
    best
}

struct Search<'a> {
    graph: &'a GraphStore,
    lo: Timestamp,
    t: Timestamp,
    start: VertexId,
    target: VertexId,
    max_len: Option<u32>,
    departures: FxHashMap<VertexId, Timestamp>,
}

impl Search<'_> {
    /// From `x`, reached at time `last` after `hops` path edges: the
    /// next (vertex, timestamp) steps and the number of closing edges.
    fn expand(&self, x: VertexId, last: Timestamp, hops: u32, path: &[VertexId]) -> (Vec<(VertexId, Timestamp)>, u64) {
        let mut steps = Vec::new();
        let mut closing = 0;
        let Some(out) = self.graph.map_of(x, Direction::Out) else {
            return (steps, closing);
        };
        let from = last.saturating_add(1).max(self.lo);
        let may_close = self.max_len.is_none_or(|m| hops + 2 <= m);
        let may_extend = self.max_len.is_none_or(|m| hops + 3 <= m);
        for (&y, list) in out {
            if y == self.target {
                if may_close && from < self.t {
                    closing = list.count_in(TimeWindow { lo: from, hi: self.t - 1 }) as u64;
                }
                continue;
            }
            if !may_extend || y == self.start || path.contains(&y) {
                continue;
            }
            let Some(&dep) = self.departures.get(&y) else { continue };
            if dep <= from {
                continue;
            }
            steps.extend(list.timestamps_in(TimeWindow { lo: from, hi: dep - 1 }).map(|s| (y, s)));
        }
        (steps, closing)
    }

    fn walk(&self, x: VertexId, last: Timestamp, hops: u32, path: &mut Vec<VertexId>, hist: &mut LengthHistogram) {
        let (steps, closing) = self.expand(x, last, hops, path);
        hist.add(hops + 2, closing);
        for (y, s) in steps {
            path.push(y);
            self.walk(y, s, hops + 1, path, hist);
            path.pop();
        }
    }
}

/// Lengths of all temporal cycles ending with the trigger edge `u -> v`: simple
/// cycles `v -> ... -> u -> v` whose timestamps strictly increase and end at the
/// trigger, with every edge inside `[t - window, t]`. `max_len`, when set,
/// bounds the cycle length.
pub fn temporal_cycle_lengths(
    graph: &GraphStore,
    trigger: &Trigger,
    window: i64,
    max_len: Option<u32>,
) -> LengthHistogram {
    let (u, v, t) = (trigger.source, trigger.target, trigger.timestamp);
    let mut hist = LengthHistogram::new();
    if u == v || max_len.is_some_and(|m| m < 2) {
        return hist;
    }
    let lo = t.saturating_sub(window);
    let departures = latest_departures(graph, u, v, lo, t);
    if !departures.contains_key(&v) {
        return hist;
    }
    let search = Search { graph, lo, t, start: v, target: u, max_len, departures };
    let (steps, closing) = search.expand(v, lo.saturating_sub(1), 0, &[]);
    hist.add(2, closing);
    let parts = split_map(&steps, |&(y, s)| {
        let mut h = LengthHistogram::new();
        let mut path = alloc::vec![y];
        search.walk(y, s, 1, &mut path, &mut h);
        h
    });
    for h in &parts {
        hist.merge(h);
    }
    hist
}
