//! Per-vertex running statistics.
//!
//! Every vertex keeps, for each direction and each configured attribute, a
//! [`MomentAccumulator`] with the count, mean and the second to fourth central
//! moment sums. Inserting or removing one observation is O(1). Min, max and
//! median are not tracked incrementally; they are computed by scanning the
//! vertex's live incident edges.

use alloc::string::String;
use alloc::vec::Vec;

use crate::dd::Dd;
use crate::error::StatsError;
use crate::graph::{EdgeRecord, GraphStore};
use crate::types::{Direction, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum Stat {
    Sum,
    Mean,
    Min,
    Max,
    Median,
    Var,
    Skew,
    Kurtosis,
}

impl Stat {
    /// Canonical column order.
    pub const ALL: [Stat; 8] = [
        Stat::Sum,
        Stat::Mean,
        Stat::Min,
        Stat::Max,
        Stat::Median,
        Stat::Var,
        Stat::Skew,
        Stat::Kurtosis,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stat::Sum => "sum",
            Stat::Mean => "mean",
            Stat::Min => "min",
            Stat::Max => "max",
            Stat::Median => "median",
            Stat::Var => "var",
            Stat::Skew => "skew",
            Stat::Kurtosis => "kurtosis",
        }
    }

    /// Needs a scan over incident edges rather than the moment accumulator.
    pub fn is_scan(self) -> bool {
        matches!(self, Stat::Min | Stat::Max | Stat::Median)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default, deny_unknown_fields))]
pub struct StatConfig {
    /// Input attribute names (or the timestamp column name) to aggregate.
    pub attributes: Vec<String>,
    pub enabled: Vec<Stat>,
}

impl Default for StatConfig {
    fn default() -> Self {
        StatConfig { attributes: alloc::vec!["Amount".into(), "Timestamp".into()], enabled: Stat::ALL.to_vec() }
    }
}

impl StatConfig {
    /// Enabled statistics in canonical order, without duplicates.
    pub fn enabled_ordered(&self) -> Vec<Stat> {
        Stat::ALL.iter().copied().filter(|s| self.enabled.contains(s)).collect()
    }

    pub fn is_active(&self) -> bool {
        !self.enabled.is_empty() && !self.attributes.is_empty()
    }
}

/// Where a statistics attribute reads its value from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatSource {
    Attribute(usize),
    Timestamp,
}

impl StatSource {
    #[inline]
    pub fn value(self, rec: &EdgeRecord) -> f64 {
        match self {
            StatSource::Attribute(i) => rec.attributes[i],
            StatSource::Timestamp => rec.timestamp as f64,
        }
    }

    #[inline]
    pub fn value_of(self, timestamp: i64, attributes: &[f64]) -> f64 {
        match self {
            StatSource::Attribute(i) => attributes[i],
            StatSource::Timestamp => timestamp as f64,
        }
    }
}

/// Removals between forced rebuilds of one accumulator.
pub const AUDIT_PERIOD: u32 = 1 << 16;

/// Outcome of [`MomentAccumulator::remove`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Health {
    Ok,
    /// The accumulator should be rebuilt from the live observations.
    Rebuild,
}

/// Count, mean and central moment sums `M_k = sum (x - mean)^k` for k = 2..4,
/// kept in double-double precision so long insert/remove sequences do not
/// drift measurably from a fresh two-pass computation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MomentAccumulator {
    pub n: u64,
    mean: Dd,
    m2: Dd,
    m3: Dd,
    m4: Dd,
    /// Removals since the last rebuild.
    pub removals: u32,
}

impl MomentAccumulator {
    pub const fn new() -> Self {
        MomentAccumulator { n: 0, mean: Dd::ZERO, m2: Dd::ZERO, m3: Dd::ZERO, m4: Dd::ZERO, removals: 0 }
    }

    pub fn push(&mut self, x: f64) {
        let n1 = self.n as f64;
        self.n += 1;
        let n = self.n as f64;
        let delta = Dd::from_f64(x) - self.mean;
        let dn = delta / n;
        let dn2 = dn * dn;
        let term1 = delta * dn * n1;
        self.m4 = self.m4 + term1 * dn2 * (n * n - 3.0 * n + 3.0) + dn2 * self.m2 * 6.0 - dn * self.m3 * 4.0;
        self.m3 = self.m3 + term1 * dn * (n - 2.0) - dn * self.m2 * 3.0;
        self.m2 = self.m2 + term1;
        self.mean = self.mean + dn;
    }

    /// Exact inverse of [`push`](Self::push) for an observation that was
    /// previously pushed. Returns `None` when the accumulator is empty.
    pub fn remove(&mut self, x: f64) -> Option<Health> {
        match self.n {
            0 => return None,
            1 => {
                *self = MomentAccumulator::new();
                return Some(Health::Ok);
            }
            _ => {}
        }
        let n = self.n as f64;
        let n1 = n - 1.0;
        let old_m2 = self.m2.to_f64();
        let x = Dd::from_f64(x);
        // mean of the remaining n - 1 observations
        let mean = (self.mean * n - x) / n1;
        let delta = x - mean;
        let dn = delta / n;
        let dn2 = dn * dn;
        let term1 = delta * dn * n1;
        let m2 = self.m2 - term1;
        let m3 = self.m3 - term1 * dn * (n - 2.0) + dn * m2 * 3.0;
        let m4 = self.m4 - term1 * dn2 * (n * n - 3.0 * n + 3.0) - dn2 * m2 * 6.0 + dn * m3 * 4.0;
        self.n -= 1;
        self.mean = mean;
        self.removals = self.removals.saturating_add(1);
        if self.n == 1 {
            // the mean still carries rounding residue from the removed values,
            // and nothing later cancels it; one value is cheap to rescan
            (self.m2, self.m3, self.m4) = (Dd::ZERO, Dd::ZERO, Dd::ZERO);
            return Some(Health::Rebuild);
        }
        (self.m2, self.m3, self.m4) = (m2, m3, m4);
        let m2 = m2.to_f64();
        let mean = mean.to_f64();
        let scale = mean * mean * self.n as f64;
        let negative = m2 < -1e-9 * scale || (m2 < 0.0 && scale == 0.0);
        // most significant digits cancelled: the remainder is mostly rounding noise
        let cancelled = old_m2 > 0.0 && m2 < old_m2 * 1e-6;
        if negative || cancelled || self.removals >= AUDIT_PERIOD {
            Some(Health::Rebuild)
        } else {
            Some(Health::Ok)
        }
    }

    /// Two-pass construction from raw values. Values are summed in sorted
    /// order so the result does not depend on iteration order.
    pub fn from_values(values: &mut [f64]) -> Self {
        if values.is_empty() {
            return MomentAccumulator::new();
        }
        values.sort_unstable_by(f64::total_cmp);
        let n = values.len() as f64;
        let mean = values.iter().fold(Dd::ZERO, |acc, &x| acc + Dd::from_f64(x)) / n;
        let (mut m2, mut m3, mut m4) = (Dd::ZERO, Dd::ZERO, Dd::ZERO);
        if values.len() > 1 {
            for &x in values.iter() {
                let d = Dd::from_f64(x) - mean;
                let d2 = d * d;
                m2 = m2 + d2;
                m3 = m3 + d2 * d;
                m4 = m4 + d2 * d2;
            }
        }
        MomentAccumulator { n: values.len() as u64, mean, m2, m3, m4, removals: 0 }
    }

    /// Count, removals and the `(hi, lo)` halves of mean, M2, M3 and M4.
    pub fn to_parts(&self) -> (u64, u32, [f64; 8]) {
        let d = [self.mean, self.m2, self.m3, self.m4];
        (self.n, self.removals, core::array::from_fn(|i| if i % 2 == 0 { d[i / 2].hi } else { d[i / 2].lo }))
    }

    pub fn from_parts(n: u64, removals: u32, p: [f64; 8]) -> Self {
        let d = |i: usize| Dd { hi: p[2 * i], lo: p[2 * i + 1] };
        MomentAccumulator { n, mean: d(0), m2: d(1), m3: d(2), m4: d(3), removals }
    }

    /// Central moment sums `(M2, M3, M4)`.
    pub fn central_sums(&self) -> (f64, f64, f64) {
        (self.m2.to_f64(), self.m3.to_f64(), self.m4.to_f64())
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn sum(&self) -> f64 {
        (self.mean * self.n as f64).to_f64()
    }

    pub fn mean(&self) -> f64 {
        self.mean.to_f64()
    }

    /// Population variance `M2 / n`.
    pub fn variance(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        (self.m2 / self.n as f64).to_f64().max(0.0)
    }

    fn degenerate(&self) -> bool {
        let var = self.variance();
        let floor = 1e-13 * self.mean().abs();
        var <= 0.0 || var <= floor * floor
    }

    /// Fisher-Pearson skewness `(M3/n) / (M2/n)^1.5`; 0 for zero spread.
    pub fn skewness(&self) -> f64 {
        if self.n == 0 || self.degenerate() {
            return 0.0;
        }
        let n = self.n as f64;
        let var = self.m2 / n;
        let sd = libm::sqrt(var.to_f64());
        ((self.m3 / n).to_f64() / var.to_f64()) / sd
    }

    /// Raw (non-excess) kurtosis `(M4/n) / (M2/n)^2`; 0 for zero spread.
    pub fn kurtosis(&self) -> f64 {
        if self.n == 0 || self.degenerate() {
            return 0.0;
        }
        let n = self.n as f64;
        let var = self.m2 / n;
        (self.m4 / n).to_f64() / (var * var).to_f64()
    }

    /// Value of an O(1) statistic. Scan statistics return `None`.
    pub fn stat(&self, stat: Stat) -> Option<f64> {
        match stat {
            Stat::Sum => Some(self.sum()),
            Stat::Mean => Some(self.mean()),
            Stat::Var => Some(self.variance()),
            Stat::Skew => Some(self.skewness()),
            Stat::Kurtosis => Some(self.kurtosis()),
            Stat::Min | Stat::Max | Stat::Median => None,
        }
    }
}

/// Min, max or median of `values`; `None` when empty. Median of an even
/// count averages the two middle values. Reorders `values`.
pub fn scan_stat(values: &mut [f64], stat: Stat) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    match stat {
        Stat::Min => values.iter().copied().min_by(f64::total_cmp),
        Stat::Max => values.iter().copied().max_by(f64::total_cmp),
        Stat::Median => {
            let n = values.len();
            let (lo, hi, _) = values.select_nth_unstable_by(n / 2, f64::total_cmp);
            let upper = *hi;
            if n % 2 == 1 {
                Some(upper)
            } else {
                let lower = lo.iter().copied().max_by(f64::total_cmp).expect("n >= 2");
                Some((lower + upper) / 2.0)
            }
        }
        _ => None,
    }
}

/// Accumulators for every (vertex, direction, attribute).
#[derive(Debug, Clone)]
pub struct VertexStats {
    sources: Vec<StatSource>,
    acc: Vec<MomentAccumulator>,
}

impl VertexStats {
    pub fn new(sources: Vec<StatSource>) -> Self {
        VertexStats { sources, acc: Vec::new() }
    }

    pub fn sources(&self) -> &[StatSource] {
        &self.sources
    }

    pub fn attribute_count(&self) -> usize {
        self.sources.len()
    }

    #[inline]
    fn base(&self, v: VertexId, dir: Direction) -> usize {
        let d = match dir {
            Direction::In => 0,
            Direction::Out => 1,
        };
        (v.index() * 2 + d) * self.sources.len()
    }

    fn ensure(&mut self, v: VertexId) {
        let need = (v.index() + 1) * 2 * self.sources.len();
        if self.acc.len() < need {
            self.acc.resize(need, MomentAccumulator::new());
        }
    }

    pub fn accumulator(&self, v: VertexId, dir: Direction, attr: usize) -> MomentAccumulator {
        self.acc.get(self.base(v, dir) + attr).copied().unwrap_or_default()
    }

    /// Raw accumulator storage, vertex-major then direction (in, out) then
    /// attribute. Used by snapshots.
    pub fn raw(&self) -> &[MomentAccumulator] {
        &self.acc
    }

    pub fn from_raw(sources: Vec<StatSource>, acc: Vec<MomentAccumulator>) -> Self {
        VertexStats { sources, acc }
    }

    /// Adds one observation per attribute. Leaves every accumulator untouched
    /// if any value is non-finite.
    pub fn on_insert(&mut self, v: VertexId, dir: Direction, values: &[f64]) -> Result<(), StatsError> {
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, x)| !x.is_finite()) {
            return Err(StatsError::NonFinite { index, value });
        }
        if self.sources.is_empty() {
            return Ok(());
        }
        self.ensure(v);
        let base = self.base(v, dir);
        for (a, &x) in values.iter().enumerate().take(self.sources.len()) {
            self.acc[base + a].push(x);
        }
        Ok(())
    }

    /// Removes one observation per attribute. Returns the attribute indices
    /// whose accumulators must be rebuilt with [`rebuild`](Self::rebuild).
    pub fn on_remove(&mut self, v: VertexId, dir: Direction, values: &[f64]) -> Result<Vec<usize>, StatsError> {
        let mut stale = Vec::new();
        if self.sources.is_empty() {
            return Ok(stale);
        }
        self.ensure(v);
        let base = self.base(v, dir);
        for (a, &x) in values.iter().enumerate().take(self.sources.len()) {
            match self.acc[base + a].remove(x) {
                Some(Health::Ok) => {}
                Some(Health::Rebuild) => stale.push(a),
                None => return Err(StatsError::RemoveFromEmpty { vertex: v }),
            }
        }
        Ok(stale)
    }

    pub fn rebuild(&mut self, v: VertexId, dir: Direction, attr: usize, values: &mut [f64]) {
        self.ensure(v);
        let i = self.base(v, dir) + attr;
        self.acc[i] = MomentAccumulator::from_values(values);
    }

    /// Rebuilds one accumulator from the live edges in `graph`.
    pub fn rebuild_from_graph(&mut self, graph: &GraphStore, v: VertexId, dir: Direction, attr: usize) {
        let mut values = self.incident_values(graph, v, dir, attr);
        self.rebuild(v, dir, attr, &mut values);
    }

    /// Extracts the statistics values of one edge.
    pub fn values_of(&self, timestamp: i64, attributes: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.sources.iter().map(|s| s.value_of(timestamp, attributes)));
    }

    pub fn incident_values(&self, graph: &GraphStore, v: VertexId, dir: Direction, attr: usize) -> Vec<f64> {
        let src = self.sources[attr];
        graph.incident_edges(v, dir).map(|rec| src.value(rec)).collect()
    }

    /// One statistic for `(v, dir, attr)`; `None` when the vertex has no
    /// live edges in that direction.
    pub fn query_stat(
        &self,
        graph: &GraphStore,
        v: VertexId,
        dir: Direction,
        attr: usize,
        stat: Stat,
    ) -> Result<Option<f64>, StatsError> {
        if attr >= self.sources.len() {
            return Err(StatsError::UnknownAttribute(alloc::format!("#{attr}")));
        }
        let acc = self.accumulator(v, dir, attr);
        if acc.is_empty() {
            return Ok(None);
        }
        if stat.is_scan() {
            let mut values = self.incident_values(graph, v, dir, attr);
            Ok(scan_stat(&mut values, stat))
        } else {
            Ok(acc.stat(stat))
        }
    }

    /// All `stats` for `(v, dir, attr)` with at most one edge scan.
    #[allow(clippy::too_many_arguments)]
    pub fn query_many(
        &self,
        graph: &GraphStore,
        v: VertexId,
        dir: Direction,
        attr: usize,
        stats: &[Stat],
        scratch: &mut Vec<f64>,
        out: &mut Vec<Option<f64>>,
    ) {
        let acc = self.accumulator(v, dir, attr);
        if acc.is_empty() {
            out.extend(stats.iter().map(|_| None));
            return;
        }
        let mut scanned = false;
        for &s in stats {
            if s.is_scan() {
                if !scanned {
                    let src = self.sources[attr];
                    scratch.clear();
                    scratch.extend(graph.incident_edges(v, dir).map(|rec| src.value(rec)));
                    scanned = true;
                }
                out.push(scan_stat(scratch, s));
            } else {
                out.push(acc.stat(s));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn acc_of(values: &[f64]) -> MomentAccumulator {
        let mut a = MomentAccumulator::new();
        for &x in values {
            a.push(x);
        }
        a
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn one_two_three() {
        let a = acc_of(&[1.0, 2.0, 3.0]);
        assert_eq!(a.n, 3);
        assert!(close(a.mean(), 2.0));
        assert!(close(a.sum(), 6.0));
        assert!(close(a.central_sums().0, 2.0));
        assert!(close(a.variance(), 2.0 / 3.0));
        assert!(close(a.kurtosis(), 1.5));
        assert!(close(a.skewness(), 0.0));
    }

    #[test]
    fn single_value_has_no_spread() {
        let a = acc_of(&[42.5]);
        assert_eq!(a.central_sums(), (0.0, 0.0, 0.0));
        assert_eq!(a.skewness(), 0.0);
    }

    #[test]
    fn symmetric_values_have_zero_skew() {
        assert_eq!(acc_of(&[-1.0, 0.0, 1.0]).skewness(), 0.0);
    }

    #[test]
    fn constant_values_follow_degenerate_convention() {
        let a = acc_of(&[5.0, 5.0, 5.0]);
        assert_eq!(a.variance(), 0.0);
        assert_eq!(a.skewness(), 0.0);
        assert_eq!(a.kurtosis(), 0.0);
    }

    #[test]
    fn remove_middle_value() {
        let mut a = acc_of(&[1.0, 2.0, 3.0]);
        assert_eq!(a.remove(2.0), Some(Health::Ok));
        let b = acc_of(&[1.0, 3.0]);
        assert_eq!(a.n, 2);
        let ((a2, a3, a4), (b2, b3, b4)) = (a.central_sums(), b.central_sums());
        assert!(close(a.mean(), 2.0));
        assert!(close(a2, 2.0) && close(a2, b2));
        assert!(close(a3, b3));
        assert!(close(a4, b4));
    }

    #[test]
    fn insert_then_remove_is_zero() {
        let mut a = acc_of(&[7.25]);
        a.remove(7.25).unwrap();
        assert_eq!(a, MomentAccumulator::new());
        assert_eq!(a.remove(1.0), None);
    }

    #[test]
    fn cancellation_requests_rebuild() {
        let mut a = acc_of(&[5.0, 5.0, 5.0, 1.0e6]);
        assert_eq!(a.remove(1.0e6), Some(Health::Rebuild));
    }

    #[test]
    fn last_value_is_rescanned() {
        let mut a = acc_of(&[0.0, 0.01, 0.01]);
        a.remove(0.01).unwrap();
        assert_eq!(a.remove(0.01), Some(Health::Rebuild));
    }

    #[test]
    fn periodic_audit() {
        let mut a = acc_of(&[1.0, 2.0]);
        a.removals = AUDIT_PERIOD - 1;
        a.push(3.0);
        assert_eq!(a.remove(3.0), Some(Health::Rebuild));
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(scan_stat(&mut [4.0, 1.0, 3.0, 2.0], Stat::Median), Some(2.5));
        assert_eq!(scan_stat(&mut [4.0, 1.0, 3.0], Stat::Median), Some(3.0));
        assert_eq!(scan_stat(&mut [4.0, 1.0, 3.0], Stat::Min), Some(1.0));
        assert_eq!(scan_stat(&mut [4.0, 1.0, 3.0], Stat::Max), Some(4.0));
        assert_eq!(scan_stat(&mut [], Stat::Median), None);
    }

    #[test]
    fn non_finite_is_rejected_without_side_effects() {
        let mut s = VertexStats::new(vec![StatSource::Attribute(0), StatSource::Attribute(1)]);
        s.on_insert(VertexId(0), Direction::Out, &[1.0, 2.0]).unwrap();
        let before = s.accumulator(VertexId(0), Direction::Out, 0);
        let err = s.on_insert(VertexId(0), Direction::Out, &[3.0, f64::NAN]);
        assert!(matches!(err, Err(StatsError::NonFinite { index: 1, .. })));
        assert_eq!(s.accumulator(VertexId(0), Direction::Out, 0), before);
    }

    #[test]
    fn directions_are_separate() {
        let mut s = VertexStats::new(vec![StatSource::Attribute(0)]);
        s.on_insert(VertexId(1), Direction::In, &[10.0]).unwrap();
        assert!(s.accumulator(VertexId(1), Direction::Out, 0).is_empty());
        assert_eq!(s.accumulator(VertexId(1), Direction::In, 0).n, 1);
        assert!(matches!(
            s.on_remove(VertexId(1), Direction::Out, &[10.0]),
            Err(StatsError::RemoveFromEmpty { .. })
        ));
    }
}
