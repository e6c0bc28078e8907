//! Synthetic transaction streams with planted motifs and known counts.
//!
//! Background traffic flows through a layered graph: account `x` of layer
//! `L` pays account `x + c (mod P)` of layer `L + 1`, with offsets `c` taken
//! from `{0, .., k-1}` on even layers and `{0, k, .., (k-1)k}` on odd ones.
//! Because `k^2 < P`, every two-hop path between a pair of accounts is
//! unique, so the background holds no cycles and no scatter-gather patterns.
//! Motifs use their own accounts and are interleaved at random positions.
//! Timestamps strictly increase, so with windows covering the whole stream
//! every planted cycle is reported exactly once, by its latest edge.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use txmotif_core::{InputSchema, Transaction};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pattern {
    Cycles,
    Smurfing,
    Mixed,
}

impl FromStr for Pattern {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "cycles" => Ok(Pattern::Cycles),
            "smurfing" => Ok(Pattern::Smurfing),
            "mixed" => Ok(Pattern::Mixed),
            other => Err(format!("invalid pattern name {other:?} (expected cycles, smurfing or mixed)")),
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pattern::Cycles => "cycles",
            Pattern::Smurfing => "smurfing",
            Pattern::Mixed => "mixed",
        })
    }
}

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub pattern: Pattern,
    pub edges: usize,
    pub seed: u64,
    /// Accounts per background layer (`P`).
    pub accounts_per_layer: u32,
    pub layers: u32,
    /// Background out-degree per account (`k`); needs `k * k < P`.
    pub fan: u32,
    /// Mean gap between consecutive timestamps, in seconds.
    pub mean_gap: u32,
    pub start: i64,
    /// Fraction of edges that belong to planted motifs.
    pub motif_share: f64,
}

impl GenConfig {
    pub fn new(pattern: Pattern, edges: usize, seed: u64) -> Self {
        GenConfig {
            pattern,
            edges,
            seed,
            accounts_per_layer: 1009,
            layers: 6,
            fan: 4,
            mean_gap: 30,
            start: 1_600_000_000,
            motif_share: 0.1,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        if self.layers < 2 {
            return bad("generator needs at least 2 layers");
        }
        if self.fan == 0 || u64::from(self.fan) * u64::from(self.fan) >= u64::from(self.accounts_per_layer) {
            return bad("generator fan k must satisfy 0 < k*k < accounts per layer");
        }
        if self.mean_gap == 0 {
            return bad("generator mean gap must be positive");
        }
        if !(0.0..=1.0).contains(&self.motif_share) {
            return bad("motif share must lie in [0, 1]");
        }
        Ok(())
    }
}

/// Planted motif counts, written next to the stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub pattern: Pattern,
    pub edges: usize,
    pub seed: u64,
    /// Planted simple cycles by length.
    pub cycles: BTreeMap<u32, u64>,
    /// Planted cycles whose timestamps increase along the cycle, by length.
    pub temporal_cycles: BTreeMap<u32, u64>,
    pub scatter_gather_motifs: u64,
    pub intermediates_per_motif: u32,
    /// Expected column sums over a full transform under the default bins,
    /// with every window covering the stream.
    pub expected_columns: BTreeMap<String, u64>,
}

const SG_WIDTH: u32 = 3;

/// A cycle is temporal when, read from the edge after its latest one, the
/// emission ranks increase all the way round: exactly one cyclic descent.
fn is_temporal(ranks: &[usize]) -> bool {
    let n = ranks.len();
    (0..n).filter(|&j| ranks[(j + 1) % n] < ranks[j]).count() == 1
}

pub fn generate(cfg: &GenConfig) -> Result<(Vec<Transaction>, GroundTruth)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let budget = (cfg.edges as f64 * cfg.motif_share).round() as usize;
    let (mut cycle_budget, mut sg_budget) = match cfg.pattern {
        Pattern::Cycles => (budget, 0),
        Pattern::Smurfing => (0, budget),
        Pattern::Mixed => (budget / 2, budget - budget / 2),
    };

    let mut motifs: Vec<Vec<(String, String)>> = Vec::new();
    let mut cycles = BTreeMap::new();
    let mut temporal = BTreeMap::new();
    while cycle_budget >= 3 {
        let len = rng.random_range(3..=6usize).min(cycle_budget);
        cycle_budget -= len;
        let m = motifs.len();
        let ring: Vec<(String, String)> =
            (0..len).map(|j| (format!("c{m}_{j}"), format!("c{m}_{}", (j + 1) % len))).collect();
        let order: Vec<usize> = if rng.random_bool(0.5) {
            let r = rng.random_range(0..len);
            (0..len).map(|j| (r + j) % len).collect()
        } else {
            let mut o: Vec<usize> = (0..len).collect();
            o.shuffle(&mut rng);
            o
        };
        let mut ranks = vec![0; len];
        for (rank, &j) in order.iter().enumerate() {
            ranks[j] = rank;
        }
        *cycles.entry(len as u32).or_insert(0) += 1;
        if is_temporal(&ranks) {
            *temporal.entry(len as u32).or_insert(0) += 1;
        }
        motifs.push(order.into_iter().map(|j| ring[j].clone()).collect());
    }
    let mut sg_count = 0;
    while sg_budget >= 2 * SG_WIDTH as usize {
        sg_budget -= 2 * SG_WIDTH as usize;
        let m = motifs.len();
        let (src, dst) = (format!("s{m}_src"), format!("s{m}_dst"));
        let mut scatter: Vec<_> = (0..SG_WIDTH).map(|j| (src.clone(), format!("s{m}_mid{j}"))).collect();
        let mut gather: Vec<_> = (0..SG_WIDTH).map(|j| (format!("s{m}_mid{j}"), dst.clone())).collect();
        scatter.shuffle(&mut rng);
        gather.shuffle(&mut rng);
        scatter.extend(gather);
        motifs.push(scatter);
        sg_count += 1;
    }

    let mut positions: Vec<usize> = (0..cfg.edges).collect();
    positions.shuffle(&mut rng);
    let mut slots: Vec<Option<(String, String)>> = vec![None; cfg.edges];
    let mut next = 0;
    for motif in motifs {
        let mut at = positions[next..next + motif.len()].to_vec();
        next += motif.len();
        at.sort_unstable();
        for (p, e) in at.into_iter().zip(motif) {
            slots[p] = Some(e);
        }
    }

    let (p, k) = (cfg.accounts_per_layer, cfg.fan);
    let mut ts = cfg.start;
    let mut rows = Vec::with_capacity(cfg.edges);
    for (i, slot) in slots.into_iter().enumerate() {
        let (src, dst) = slot.unwrap_or_else(|| {
            let layer = rng.random_range(0..cfg.layers - 1);
            let x = rng.random_range(0..p);
            let c = if layer % 2 == 0 { rng.random_range(0..k) } else { k * rng.random_range(0..k) };
            (format!("b{layer}_{x}"), format!("b{}_{}", layer + 1, (x + c) % p))
        });
        ts += rng.random_range(1..=2 * i64::from(cfg.mean_gap) - 1);
        let amount = rng.random_range(100..=1_000_000u32) as f64 / 100.0;
        rows.push(Transaction::new(i as u64, src, dst, ts, vec![amount]));
    }

    let mut expected = BTreeMap::new();
    for (&len, &c) in &cycles {
        expected.insert(format!("cycle_len_{len}"), c);
    }
    for (&len, &c) in &temporal {
        expected.insert(format!("tcycle_len_{len}"), c);
    }
    if sg_count > 0 {
        // the last two gather edges of each motif complete sets of 2 and 3
        expected.insert("sg_size_2".into(), sg_count);
        expected.insert("sg_size_3".into(), sg_count);
    }
    let truth = GroundTruth {
        pattern: cfg.pattern,
        edges: cfg.edges,
        seed: cfg.seed,
        cycles,
        temporal_cycles: temporal,
        scatter_gather_motifs: sg_count,
        intermediates_per_motif: SG_WIDTH,
        expected_columns: expected,
    };
    Ok((rows, truth))
}

/// Sidecar path for a generated stream: `<output>.truth.json`.
pub fn truth_path(output: &Path) -> std::path::PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".truth.json");
    s.into()
}

pub fn write(cfg: &GenConfig, output: &Path) -> Result<GroundTruth> {
    let (rows, truth) = generate(cfg)?;
    crate::io::write_transactions(output, &InputSchema::default(), &rows)?;
    let sidecar = truth_path(output);
    let text = serde_json::to_string_pretty(&truth).expect("truth serializes");
    std::fs::write(&sidecar, text + "\n").map_err(|e| CliError::io(&sidecar, e))?;
    Ok(truth)
}
