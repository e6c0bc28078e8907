//! Brute-force reference implementations over a flat edge list.
//!
//! These share no code with the miners and are only meant for tests: they
//! enumerate every vertex pair or every edge sequence directly.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::types::{LengthHistogram, Timestamp};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawEdge {
    pub source: u32,
    pub target: u32,
    pub timestamp: Timestamp,
}

fn in_window(e: &RawEdge, anchor: Timestamp, window: i64) -> bool {
    e.timestamp >= anchor - window && e.timestamp <= anchor
}

/// `(source, intermediates, sink)` for every scatter-gather pattern that
/// contains the trigger `u -> v` at `t`. `edges` need not contain the trigger.
pub fn scatter_gather(edges: &[RawEdge], u: u32, v: u32, t: Timestamp, window: i64) -> BTreeSet<(u32, Vec<u32>, u32)> {
    let mut hits = BTreeSet::new();
    if u == v {
        return hits;
    }
    let mut live: Vec<RawEdge> = edges.iter().copied().filter(|e| in_window(e, t, window)).collect();
    live.push(RawEdge { source: u, target: v, timestamp: t });
    let n = live.iter().map(|e| e.source.max(e.target)).max().unwrap_or(0) + 1;
    let mut adj = vec![false; (n * n) as usize];
    for e in &live {
        adj[(e.source * n + e.target) as usize] = true;
    }
    let has = |a: u32, b: u32| adj[(a * n + b) as usize];
    for s in 0..n {
        for k in 0..n {
            if s == k {
                continue;
            }
            let inter: Vec<u32> = (0..n).filter(|&x| x != s && x != k && has(s, x) && has(x, k)).collect();
            if inter.len() < 2 {
                continue;
            }
            let contains_trigger = (s == u && inter.contains(&v)) || (k == v && inter.contains(&u));
            if contains_trigger {
                hits.insert((s, inter, k));
            }
        }
    }
    hits
}

/// Closing paths `v -> ... -> u` with distinct vertices (never `u` or `v`
/// in between), one per edge sequence, accepted by `step`.
fn count_paths(
    edges: &[RawEdge],
    u: u32,
    v: u32,
    max_path_edges: u32,
    step: &dyn Fn(Option<Timestamp>, &RawEdge) -> bool,
) -> LengthHistogram {
    let mut hist = LengthHistogram::new();
    let mut stack: Vec<(u32, Option<Timestamp>, Vec<u32>)> = vec![(v, None, vec![v])];
    while let Some((x, last, path)) = stack.pop() {
        let hops = path.len() as u32 - 1;
        if hops >= max_path_edges {
            continue;
        }
        for e in edges.iter().filter(|e| e.source == x && step(last, e)) {
            if e.target == u {
                hist.add(hops + 2, 1);
            } else if !path.contains(&e.target) {
                let mut p = path.clone();
                p.push(e.target);
                stack.push((e.target, Some(e.timestamp), p));
            }
        }
    }
    hist
}

/// Simple cycles closed by the trigger `u -> v` at `t`, at most `max_len`
/// edges, every edge in `[t - window, t]`.
pub fn simple_cycles(edges: &[RawEdge], u: u32, v: u32, t: Timestamp, window: i64, max_len: u32) -> LengthHistogram {
    if u == v || max_len < 2 {
        return LengthHistogram::new();
    }
    count_paths(edges, u, v, max_len - 1, &|_, e| in_window(e, t, window))
}

/// Temporal cycles closed by the trigger: path timestamps strictly increase
/// and stay below `t`, all inside `[t - window, t]`.
pub fn temporal_cycles(
    edges: &[RawEdge],
    u: u32,
    v: u32,
    t: Timestamp,
    window: i64,
    max_len: Option<u32>,
) -> LengthHistogram {
    if u == v || max_len.is_some_and(|m| m < 2) {
        return LengthHistogram::new();
    }
    let bound = max_len.map_or(u32::MAX, |m| m - 1);
    count_paths(edges, u, v, bound, &|last, e| {
        in_window(e, t, window) && e.timestamp < t && last.is_none_or(|l| e.timestamp > l)
    })
}

/// Distinct in- and out-neighbours of `x`, optionally restricted to
/// `[anchor - window, anchor]`.
pub fn fans(edges: &[RawEdge], x: u32, window: Option<i64>, anchor: Timestamp) -> (u64, u64) {
    let ok = |e: &RawEdge| window.is_none_or(|w| in_window(e, anchor, w));
    let fin: BTreeSet<u32> = edges.iter().filter(|e| e.target == x && ok(e)).map(|e| e.source).collect();
    let fout: BTreeSet<u32> = edges.iter().filter(|e| e.source == x && ok(e)).map(|e| e.target).collect();
    (fin.len() as u64, fout.len() as u64)
}

/// Edges that survive a retention window of `delta`: `t >= t_now - delta`.
pub fn retained(edges: &[RawEdge], delta: i64) -> Vec<RawEdge> {
    let Some(now) = edges.iter().map(|e| e.timestamp).max() else {
        return Vec::new();
    };
    edges.iter().copied().filter(|e| e.timestamp >= now - delta).collect()
}

/// Sorted copy; min, max and median by definition.
pub fn order_stats(values: &[f64]) -> Option<(f64, f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let median = if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 };
    Some((v[0], v[n - 1], median))
}

/// Neumaier-compensated sum.
fn sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for x in values {
        let t = s + x;
        c += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        s = t;
    }
    s + c
}

/// Two-pass population moments with compensated sums: (mean, variance,
/// skewness, raw kurtosis). Zero spread reports zero skewness and kurtosis.
pub fn moments(values: &[f64]) -> Option<(f64, f64, f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = sum(values.iter().copied()) / n;
    // residual of the rounded mean, folded back into the deviations
    let r = sum(values.iter().map(|x| x - mean)) / n;
    let dev = |x: f64| (x - mean) - r;
    let m2 = sum(values.iter().map(|&x| dev(x) * dev(x))) / n;
    let m3 = sum(values.iter().map(|&x| dev(x) * dev(x) * dev(x))) / n;
    let m4 = sum(values.iter().map(|&x| {
        let d2 = dev(x) * dev(x);
        d2 * d2
    })) / n;
    if m2 <= 0.0 {
        return Some((mean, 0.0, 0.0, 0.0));
    }
    Some((mean + r, m2, m3 / (m2 * libm::sqrt(m2)), m4 / (m2 * m2)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(source: u32, target: u32, timestamp: i64) -> RawEdge {
        RawEdge { source, target, timestamp }
    }

    #[test]
    fn sg_four_edge_example() {
        // u=0, a=1, w=2, v=3
        let edges = [e(0, 1, 1), e(1, 2, 2), e(3, 2, 3)];
        let hits = scatter_gather(&edges, 0, 3, 4, 10);
        assert_eq!(hits.into_iter().collect::<Vec<_>>(), vec![(0, vec![1, 3], 2)]);
    }

    #[test]
    fn cycles_basic() {
        let edges = [e(0, 1, 1), e(0, 1, 2), e(1, 2, 3), e(2, 0, 4)];
        assert_eq!(simple_cycles(&edges, 2, 0, 4, 10, 10).count(3), 2);
        assert_eq!(temporal_cycles(&edges, 2, 0, 4, 10, None).count(3), 2);
        assert!(temporal_cycles(&edges, 2, 0, 4, 10, Some(2)).is_empty());
    }

    #[test]
    fn moments_of_small_set() {
        let (m, var, skew, kurt) = moments(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((m, skew), (2.0, 0.0));
        assert!((var - 2.0 / 3.0).abs() < 1e-15);
        assert!((kurt - 1.5).abs() < 1e-12);
    }
}
