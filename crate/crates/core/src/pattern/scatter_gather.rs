use alloc::vec::Vec;

use super::{ScatterGatherHit, Trigger};
use crate::graph::{GraphStore, NeighborMap, TimeWindow};
use crate::par::split_map;
use crate::types::{Direction, VertexId};

/// Windowed neighbours of `v`, ascending, with `extra` added if missing.
fn neighbors_with(graph: &GraphStore, v: VertexId, dir: Direction, w: TimeWindow, extra: Option<VertexId>) -> Vec<VertexId> {
    let mut out = graph.neighbors_in_window(v, dir, w).unwrap_or_default();
    if let Some(x) = extra {
        if let Err(at) = out.binary_search(&x) {
            out.insert(at, x);
        }
    }
    out
}

/// `{x in sorted : x has an edge in w inside map} \ {skip_a, skip_b}`, ascending.
fn intersect(sorted: &[VertexId], map: Option<&NeighborMap>, w: TimeWindow, skip: [VertexId; 2]) -> Vec<VertexId> {
    let Some(map) = map else { return Vec::new() };
    let keep = |x: VertexId| x != skip[0] && x != skip[1];
    if sorted.len() <= map.len() {
        sorted
            .iter()
            .copied()
            .filter(|&x| keep(x) && map.get(&x).is_some_and(|l| l.any_in(w)))
            .collect()
    } else {
        let mut out: Vec<VertexId> = map
            .iter()
            .filter(|(&x, l)| keep(x) && sorted.binary_search(&x).is_ok() && l.any_in(w))
            .map(|(&x, _)| x)
            .collect();
        out.sort_unstable();
        out
    }
}

/// Every scatter-gather pattern containing the trigger edge `u -> v`, with
/// all pattern edges inside `[t - window, t]`.
///
/// The first phase treats `v` as an intermediate: each windowed out-neighbour
/// `w` of `v` is a candidate sink and the intermediates are
/// `N+(u) ∩ N-(w)`. The second phase treats `u` as an intermediate: each
/// in-neighbour `w` of `u` is a candidate source and the intermediates are
/// `N-(v) ∩ N+(w)`. Sources and sinks are never counted as intermediates, and
/// only sets of two or more intermediates are reported.
pub fn scatter_gather_hits(graph: &GraphStore, trigger: &Trigger, window: i64) -> Vec<ScatterGatherHit> {
    let (u, v) = (trigger.source, trigger.target);
    if u == v {
        return Vec::new();
    }
    let tw = TimeWindow::ending_at(trigger.timestamp, window);
    let mut hits = Vec::new();

    let u_out = neighbors_with(graph, u, Direction::Out, tw, Some(v));
    let sinks: Vec<VertexId> = neighbors_with(graph, v, Direction::Out, tw, None)
        .into_iter()
        .filter(|&w| w != u && w != v)
        .collect();
    hits.extend(
        split_map(&sinks, |&w| {
            let inter = intersect(&u_out, graph.map_of(w, Direction::In), tw, [u, w]);
            (inter.len() >= 2).then_some(ScatterGatherHit {
                source: u,
                intermediates: inter,
                sink: w,
                trigger_edge: trigger.edge_id,
            })
        })
        .into_iter()
        .flatten(),
    );

    let v_in = neighbors_with(graph, v, Direction::In, tw, Some(u));
    let sources: Vec<VertexId> = neighbors_with(graph, u, Direction::In, tw, None)
        .into_iter()
        .filter(|&w| w != u && w != v)
        .collect();
    hits.extend(
        split_map(&sources, |&w| {
            let inter = intersect(&v_in, graph.map_of(w, Direction::Out), tw, [w, v]);
            (inter.len() >= 2).then_some(ScatterGatherHit {
                source: w,
                intermediates: inter,
                sink: v,
                trigger_edge: trigger.edge_id,
            })
        })
        .into_iter()
        .flatten(),
    );
    hits
}
