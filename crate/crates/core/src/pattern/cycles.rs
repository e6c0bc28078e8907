use alloc::vec::Vec;

use super::Trigger;
use crate::graph::{GraphStore, TimeWindow};
use crate::par::split_map;
use crate::types::{Direction, LengthHistogram, VertexId};
use crate::FxHashMap;

/// Hop distance to `target` over windowed edges, walking backwards at most
/// `max_hops` steps. Paths may not pass through `start` or revisit `target`,
/// so neither is expanded.
fn distances_to(
    graph: &GraphStore,
    target: VertexId,
    start: VertexId,
    tw: TimeWindow,
    max_hops: u32,
) -> FxHashMap<VertexId, u32> {
    let mut dist = FxHashMap::default();
    dist.insert(target, 0);
    let mut frontier = alloc::vec![target];
    let mut next = Vec::new();
    for d in 1..=max_hops {
        for &x in &frontier {
            if x == start {
                continue;
            }
            let Some(inc) = graph.map_of(x, Direction::In) else { continue };
            for (&y, list) in inc {
                if y == target || dist.contains_key(&y) || !list.any_in(tw) {
                    continue;
                }
                dist.insert(y, d);
                next.push(y);
            }
        }
        if next.is_empty() {
            break;
        }
        core::mem::swap(&mut frontier, &mut next);
        next.clear();
    }
    dist
}

struct Search<'a> {
    graph: &'a GraphStore,
    tw: TimeWindow,
    start: VertexId,
    target: VertexId,
    max_hops: u32,
    dist: FxHashMap<VertexId, u32>,
}

impl Search<'_> {
    /// Candidate next hops from `x` after `depth` path edges: non-closing
    /// neighbours with their parallel-edge multiplicity, and the number of
    /// closing edges into `target`.
    fn expand(&self, x: VertexId, depth: u32, path: &[VertexId]) -> (Vec<(VertexId, u64)>, u64) {
        let mut children = Vec::new();
        let mut closing = 0;
        let Some(out) = self.graph.map_of(x, Direction::Out) else {
            return (children, closing);
        };
        for (&y, list) in out {
            if y == self.target {
                closing = list.count_in(self.tw) as u64;
                continue;
            }
            if y == self.start || path.contains(&y) {
                continue;
            }
            let Some(&dy) = self.dist.get(&y) else { continue };
            if depth + 1 + dy > self.max_hops {
                continue;
            }
            let c = list.count_in(self.tw) as u64;
            if c > 0 {
                children.push((y, c));
            }
        }
        (children, closing)
    }

    fn walk(&self, x: VertexId, depth: u32, mult: u64, path: &mut Vec<VertexId>, hist: &mut LengthHistogram) {
        let (children, closing) = self.expand(x, depth, path);
        // path edges (depth + 1) plus the trigger edge
        hist.add(depth + 2, mult * closing);
        for (y, c) in children {
            path.push(y);
            self.walk(y, depth + 1, mult * c, path, hist);
            path.pop();
        }
    }
}

/// Lengths of all simple cycles through the trigger edge `u -> v`, with every
/// edge inside `[t - window, t]` and at most `max_len` edges. Each distinct
/// edge sequence counts once, so parallel edges multiply.
pub fn simple_cycle_lengths(graph: &GraphStore, trigger: &Trigger, window: i64, max_len: u32) -> LengthHistogram {
    let (u, v) = (trigger.source, trigger.target);
    let mut hist = LengthHistogram::new();
    if u == v || max_len < 2 {
        return hist;
    }
    let tw = TimeWindow::ending_at(trigger.timestamp, window);
    let max_hops = max_len - 1;
    let dist = distances_to(graph, u, v, tw, max_hops);
    if !dist.contains_key(&v) {
        return hist;
    }
    let search = Search { graph, tw, start: v, target: u, max_hops, dist };
    let (children, closing) = search.expand(v, 0, &[]);
    hist.add(2, closing);
    let parts = split_map(&children, |&(y, c)| {
        let mut h = LengthHistogram::new();
        let mut path = alloc::vec![y];
        search.walk(y, 1, c, &mut path, &mut h);
        h
    });
    for h in &parts {
        hist.merge(h);
    }
    hist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WindowConfig;
    use crate::types::{EdgeId, Transaction};
    use alloc::vec;

    fn setup(edges: &[(&str, &str, i64)]) -> GraphStore {
        let mut g = GraphStore::new(WindowConfig { delta: 1000 });
        for (i, &(s, t, ts)) in edges.iter().enumerate() {
            g.insert(&Transaction::new(i as u64, s, t, ts, vec![])).unwrap();
        }
        g
    }

    fn trig(g: &GraphStore, s: &str, t: &str, ts: i64) -> Trigger {
        Trigger { edge_id: EdgeId(99), source: g.vertex_id(s).unwrap(), target: g.vertex_id(t).unwrap(), timestamp: ts }
    }

    #[test]
    fn triangle() {
        let g = setup(&[("a", "b", 1), ("b", "c", 2), ("c", "a", 3)]);
        let h = simple_cycle_lengths(&g, &trig(&g, "c", "a", 3), 3, 3);
        assert_eq!(h.iter().collect::<Vec<_>>(), vec![(3, 1)]);
        assert!(simple_cycle_lengths(&g, &trig(&g, "c", "a", 3), 3, 2).is_empty());
        assert!(simple_cycle_lengths(&g, &trig(&g, "c", "a", 3), 1, 3).is_empty());
    }

    #[test]
    fn two_cycle() {
        let g = setup(&[("a", "b", 1), ("b", "a", 2)]);
        let h = simple_cycle_lengths(&g, &trig(&g, "b", "a", 2), 10, 10);
        assert_eq!(h.iter().collect::<Vec<_>>(), vec![(2, 1)]);
    }

    #[test]
    fn dag_has_no_cycles() {
        let g = setup(&[("a", "b", 1), ("b", "c", 2), ("a", "c", 3)]);
        assert!(simple_cycle_lengths(&g, &trig(&g, "a", "c", 3), 10, 10).is_empty());
    }

    #[test]
    fn parallel_edges_multiply() {
        let g = setup(&[("a", "b", 1), ("a", "b", 2), ("b", "c", 2), ("b", "c", 2), ("b", "c", 3), ("c", "a", 4)]);
        let h = simple_cycle_lengths(&g, &trig(&g, "c", "a", 4), 10, 10);
        assert_eq!(h.count(3), 6);
    }

    #[test]
    fn no_repeated_vertices() {
        // a -> b -> c -> b would revisit b
        let g = setup(&[("a", "b", 1), ("b", "c", 2), ("c", "b", 3), ("b", "x", 3), ("x", "a", 4), ("c", "a", 5)]);
        let h = simple_cycle_lengths(&g, &trig(&g, "c", "a", 5), 10, 10);
        assert_eq!(h.iter().collect::<Vec<_>>(), vec![(3, 1)]);
    }
}
