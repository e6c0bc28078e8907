//! Acceptance suite. Every test prints one `PASS` or `FAIL` line naming its
//! criterion, then asserts it. Run with `--nocapture` to see the lines.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;
use txmotif::gen::GroundTruth;
use txmotif::manifest::RunManifest;
use txmotif_core::graph::{GraphStore, WindowConfig};
use txmotif_core::oracle::{self, RawEdge};
use txmotif_core::pattern::{scatter_gather_hits, simple_cycle_lengths, temporal_cycle_lengths, Trigger};
use txmotif_core::stats::{scan_stat, Health};
use txmotif_core::{GraphError, MomentAccumulator, Stat, Transaction};

fn verdict(name: &str, ok: bool, detail: &str) {
    println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{name}: {detail}");
}

fn within(name: &str, elapsed: Duration, limit_s: u64) -> String {
    let s = elapsed.as_secs_f64();
    assert!(s < limit_s as f64, "{name} took {s:.1}s, limit {limit_s}s");
    format!("{s:.2}s (limit {limit_s}s)")
}

/// One seeded random temporal multigraph with its windows.
struct Case {
    n: u32,
    edges: Vec<(u32, u32, i64)>,
    sg_window: i64,
    cycle_window: i64,
}

fn corpus() -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    (0..200)
        .map(|_| {
            let n = rng.random_range(2..=30u32);
            let m = rng.random_range(0..=300usize);
            let span = rng.random_range(50..=2_000i64);
            let edges = (0..m)
                .map(|_| (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..span)))
                .collect();
            Case { n, edges, sg_window: rng.random_range(0..=span / 2), cycle_window: rng.random_range(0..=span / 10) }
        })
        .collect()
}

/// Inserts the case as one batch, vertex ids equal to account numbers.
fn build(case: &Case) -> (GraphStore, Vec<RawEdge>, Vec<Trigger>) {
    let mut g = GraphStore::new(WindowConfig { delta: i64::MAX / 4 });
    for k in 0..case.n {
        g.intern_account(&k.to_string());
    }
    let mut sorted = case.edges.clone();
    sorted.sort_by_key(|e| e.2);
    for (i, &(s, t, ts)) in sorted.iter().enumerate() {
        g.insert(&Transaction::new(i as u64, s.to_string(), t.to_string(), ts, vec![])).unwrap();
    }
    let raw = g.edges().map(|r| RawEdge { source: r.source.0, target: r.target.0, timestamp: r.timestamp }).collect();
    let triggers = g
        .edges()
        .map(|r| Trigger { edge_id: r.edge_id, source: r.source, target: r.target, timestamp: r.timestamp })
        .collect();
    (g, raw, triggers)
}

#[test]
fn scatter_gather_oracle_suite() {
    let clock = Instant::now();
    let (mut edges, mut hits, mut mismatches) = (0usize, 0usize, 0usize);
    for case in corpus() {
        let (g, raw, triggers) = build(&case);
        for t in &triggers {
            let found = scatter_gather_hits(&g, t, case.sg_window);
            let got: BTreeSet<_> = found
                .iter()
                .map(|h| (h.source.0, h.intermediates.iter().map(|v| v.0).collect::<Vec<_>>(), h.sink.0))
                .collect();
            let expected = oracle::scatter_gather(&raw, t.source.0, t.target.0, t.timestamp, case.sg_window);
            if got != expected || got.len() != found.len() {
                mismatches += 1;
            }
            edges += 1;
            hits += expected.len();
        }
    }
    let time = within("scatter-gather oracle", clock.elapsed(), 60);
    verdict(
        "scatter-gather oracle",
        mismatches == 0,
        &format!("{edges} trigger edges, {hits} oracle hits, {mismatches} mismatching edges, {time}"),
    );
}

#[test]
fn cycle_oracle_suite() {
    let clock = Instant::now();
    let (mut checks, mut cycles, mut mismatches) = (0usize, 0u64, 0usize);
    for case in corpus() {
        let (g, raw, triggers) = build(&case);
        let w = case.cycle_window;
        for t in &triggers {
            let (u, v, ts) = (t.source.0, t.target.0, t.timestamp);
            for max_len in [3, 5, 10] {
                let expected = oracle::simple_cycles(&raw, u, v, ts, w, max_len);
                cycles += expected.total();
                mismatches += usize::from(simple_cycle_lengths(&g, t, w, max_len) != expected);
                checks += 1;
            }
            let expected = oracle::temporal_cycles(&raw, u, v, ts, w, None);
            cycles += expected.total();
            mismatches += usize::from(temporal_cycle_lengths(&g, t, w, None) != expected);
            checks += 1;
        }
    }
    let time = within("cycle oracle", clock.elapsed(), 120);
    verdict(
        "cycle oracle",
        mismatches == 0,
        &format!("{checks} length histograms, {cycles} oracle cycles, {mismatches} mismatches, {time}"),
    );
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 || (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

#[test]
fn incremental_statistics_suite() {
    let clock = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc);
    let (mut compared, mut bad, mut rebuilds) = (0u64, Vec::new(), 0u32);
    for a in 0..100 {
        // amounts spanning cents to millions, some sitting on a large offset
        let offset = if a % 4 == 0 { 1e6 } else { 0.0 };
        let scale = 10f64.powi(rng.random_range(-2..=6));
        let mut acc = MomentAccumulator::new();
        let mut live: Vec<f64> = Vec::new();
        for _ in 0..10_000 {
            if live.is_empty() || rng.random_bool(0.5) {
                let x = offset + (rng.random::<f64>() * scale * 100.0).round() / 100.0;
                acc.push(x);
                live.push(x);
            } else {
                let y = live.swap_remove(rng.random_range(0..live.len()));
                if acc.remove(y).expect("value was pushed") == Health::Rebuild {
                    acc = MomentAccumulator::from_values(&mut live.clone());
                    rebuilds += 1;
                }
            }
            let Some((mean, var, skew, kurt)) = oracle::moments(&live) else {
                continue;
            };
            let (min, max, median) = oracle::order_stats(&live).unwrap();
            let mut scratch = live.clone();
            let pairs = [
                ("mean", acc.mean(), mean),
                ("var", acc.variance(), var),
                ("skew", acc.skewness(), skew),
                ("kurt", acc.kurtosis(), kurt),
            ];
            for (name, got, want) in pairs {
                compared += 1;
                if !close(got, want) {
                    bad.push(format!("acc {a} {name}: {got} vs {want}"));
                }
            }
            for (stat, want) in [(Stat::Min, min), (Stat::Max, max), (Stat::Median, median)] {
                compared += 1;
                if scan_stat(&mut scratch, stat) != Some(want) {
                    bad.push(format!("acc {a} {stat:?}"));
                }
            }
            if acc.n as usize != live.len() {
                bad.push(format!("acc {a} count"));
            }
        }
    }
    let time = within("incremental statistics", clock.elapsed(), 30);
    verdict(
        "incremental statistics",
        bad.is_empty(),
        &format!("{compared} comparisons, {rebuilds} rebuilds, {} out of tolerance {:?}, {time}", bad.len(), bad.first()),
    );
}

#[test]
fn window_eviction_suite() {
    let clock = Instant::now();
    let mut failures = Vec::new();
    for delta in [10i64, 1_000] {
        let mut rng = ChaCha8Rng::seed_from_u64(delta as u64);
        let mut g = GraphStore::new(WindowConfig { delta });
        let mut accepted: Vec<(u64, i64)> = Vec::new();
        let (mut now, mut clock_ts) = (i64::MIN, 10 * delta);
        for i in 0..100_000u64 {
            clock_ts += rng.random_range(0..3);
            // a share of late arrivals, some beyond the window
            let ts = if rng.random_bool(0.1) { clock_ts - rng.random_range(0..2 * delta) } else { clock_ts };
            let (s, t) = (rng.random_range(0..500u32), rng.random_range(0..500u32));
            match g.insert(&Transaction::new(i, s.to_string(), t.to_string(), ts, vec![])) {
                Ok(_) => {
                    accepted.push((i, ts));
                    now = now.max(ts);
                }
                Err(GraphError::Outdated(..)) if ts < now - delta => {}
                Err(e) => failures.push(format!("delta {delta}: edge {i}: {e}")),
            }
            g.evict_outdated();
            if i % 1_000 == 999 || i == 99_999 {
                accepted.retain(|&(_, t)| t >= now - delta);
                let mut expected: Vec<u64> = accepted.iter().map(|&(id, _)| id).collect();
                expected.sort_unstable();
                let mut live: Vec<u64> = g.edges().map(|r| r.edge_id.0).collect();
                live.sort_unstable();
                if live != expected {
                    failures.push(format!("delta {delta}: live set differs after {} edges", i + 1));
                }
                if let Err(e) = g.audit() {
                    failures.push(format!("delta {delta}: audit: {e}"));
                }
            }
        }
    }
    let time = within("window eviction", clock.elapsed(), 30);
    verdict("window eviction", failures.is_empty(), &format!("2 x 10^5 edges, {} failures {:?}, {time}", failures.len(), failures.first()));
}

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_txmotif"));
    c.env_remove("TXMOTIF_CONFIG").env_remove("TXMOTIF_THREADS");
    c
}

fn txmotif(args: &[&str]) {
    let out = bin().args(args).output().expect("binary runs");
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn gen(dir: &Path, pattern: &str, edges: usize, seed: u64) -> std::path::PathBuf {
    let path = dir.join(format!("{pattern}-{edges}.csv"));
    txmotif(&["gen", "--pattern", pattern, "--edges", &edges.to_string(), "--seed", &seed.to_string(), "--output", p(&path)]);
    path
}

#[test]
fn determinism_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let input = gen(dir.path(), "mixed", 100_000, 42);
    let (one, eight) = (dir.path().join("one.csv"), dir.path().join("eight.csv"));
    for (threads, out) in [("1", &one), ("8", &eight)] {
        txmotif(&["transform", "--input", p(&input), "--batch-size", "2048", "--threads", threads, "--output", p(out)]);
    }
    let (a, b) = (fs::read(&one).unwrap(), fs::read(&eight).unwrap());
    let lines = a.iter().filter(|&&c| c == b'\n').count();
    verdict("determinism", a == b, &format!("{lines} lines, {} vs {} bytes", a.len(), b.len()));
}

#[test]
fn injected_motif_recovery() {
    let dir = TempDir::new().unwrap();
    let input = gen(dir.path(), "mixed", 100_000, 7);
    let truth: GroundTruth =
        serde_json::from_str(&fs::read_to_string(txmotif::gen::truth_path(&input)).unwrap()).unwrap();
    // every window wider than the whole stream
    let cfg = dir.path().join("full.toml");
    fs::write(
        &cfg,
        "[window]\ndelta = 1000000000\n[patterns]\nscatter_gather = 1000000000\n\
         simple_cycle = 1000000000\ntemporal_cycle = 1000000000\n",
    )
    .unwrap();
    let out = dir.path().join("out.csv");
    txmotif(&["transform", "--input", p(&input), "--config", p(&cfg), "--output", p(&out)]);

    let mut reader = csv::Reader::from_path(&out).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    let bins: Vec<usize> = (0..header.len())
        .filter(|&i| ["cycle_len_", "tcycle_len_", "sg_size_"].iter().any(|p| header[i].starts_with(p)))
        .collect();
    let mut sums: BTreeMap<String, u64> = BTreeMap::new();
    for rec in reader.records() {
        let rec = rec.unwrap();
        for &i in &bins {
            let v: u64 = rec[i].parse().unwrap();
            if v > 0 {
                *sums.entry(header[i].clone()).or_default() += v;
            }
        }
    }
    let planted: u64 = truth.cycles.values().sum::<u64>() + truth.scatter_gather_motifs;
    verdict(
        "injected motif recovery",
        sums == truth.expected_columns && truth.scatter_gather_motifs > 0 && truth.cycles.len() == 4,
        &format!("{planted} planted motifs, columns {sums:?} vs truth {:?}", truth.expected_columns),
    );
}

fn bench(input: &Path, threads: &str, report: &Path) -> RunManifest {
    let clock = Instant::now();
    txmotif(&["bench", "--input", p(input), "--batch-size", "2048", "--threads", threads, "--report", p(report)]);
    let m: RunManifest = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    println!("bench threads={threads}: {:.1}s wall, {:.0} rows/s", clock.elapsed().as_secs_f64(), m.timing.throughput_rows_per_s);
    m
}

#[test]
fn desk_scale_performance_smoke() {
    let dir = TempDir::new().unwrap();
    let clock = Instant::now();
    let input = gen(dir.path(), "mixed", 1_000_000, 3);
    let out = dir.path().join("out.csv");
    let man = dir.path().join("m.json");
    txmotif(&[
        "transform", "--input", p(&input), "--batch-size", "2048", "--threads", "8", "--output", p(&out), "--manifest",
        p(&man),
    ]);
    let total = clock.elapsed();
    let m: RunManifest = serde_json::from_str(&fs::read_to_string(&man).unwrap()).unwrap();
    let p50_ms = m.timing.latency_ms.p50;
    verdict(
        "desk-scale performance",
        total.as_secs() < 600 && p50_ms < 2_000.0 && m.rows_out == 1_000_000,
        &format!(
            "10^6 edges in {:.1}s end to end (limit 600s), p50 {p50_ms:.1} ms, p99 {:.1} ms per 2048-row batch (limit 2000 ms)",
            total.as_secs_f64(),
            m.timing.latency_ms.p99
        ),
    );
}

#[test]
fn scaling_with_workers() {
    let dir = TempDir::new().unwrap();
    let input = gen(dir.path(), "mixed", 1_000_000, 5);
    let one = bench(&input, "1", &dir.path().join("one.json"));
    let eight = bench(&input, "8", &dir.path().join("eight.json"));
    let speedup = eight.timing.throughput_rows_per_s / one.timing.throughput_rows_per_s;
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    verdict(
        "scaling",
        speedup >= 2.0,
        &format!(
            "8 workers {:.0} rows/s vs 1 worker {:.0} rows/s, speedup {speedup:.2} (need 2.00), {cores} cores available",
            eight.timing.throughput_rows_per_s, one.timing.throughput_rows_per_s
        ),
    );
}

