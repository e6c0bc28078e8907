use proptest::prelude::*;
use txmotif_core::{
    Engine, EngineConfig, Error, FeatureValue, PatternWindows, RowFlag, Transaction,
};

fn small_config() -> EngineConfig {
    let mut c = EngineConfig::default();
    c.window.delta = 50;
    c.patterns = PatternWindows { scatter_gather: 20, simple_cycle: 30, temporal_cycle: 50, fan: None };
    c.cycles.max_length = 6;
    c
}

fn stream() -> impl Strategy<Value = Vec<Transaction>> {
    prop::collection::vec((0..8u32, 0..8u32, 0..200i64, 1..1000u32), 1..120).prop_map(|rows| {
        let mut rows: Vec<_> = rows
            .into_iter()
            .enumerate()
            .map(|(i, (s, t, ts, amt))| Transaction::new(i as u64, s.to_string(), t.to_string(), ts, vec![amt as f64]))
            .collect();
        rows.sort_by_key(|t| t.timestamp);
        rows
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn one_row_per_input_row(rows in stream(), cut in 0usize..120) {
        let mut e = Engine::new(small_config()).unwrap();
        let cut = cut.min(rows.len());
        e.fit(rows[..cut].to_vec()).unwrap();
        let batch = rows[cut..].to_vec();
        let out = e.transform(batch.clone()).unwrap();
        prop_assert_eq!(out.rows.len(), batch.len());
        for (row, txn) in out.rows.iter().zip(&batch) {
            prop_assert_eq!(row.edge_id, txn.edge_id);
            prop_assert_eq!(row.values.len(), e.schema().len());
        }
        prop_assert!(e.graph().audit().is_ok());
    }

    /// fit(H) then transform(B) ends in the same state as fit(H ++ B).
    #[test]
    fn split_ingestion_reaches_same_state(rows in stream(), cut in 0usize..120) {
        let cut = cut.min(rows.len());
        let mut a = Engine::new(small_config()).unwrap();
        a.fit(rows[..cut].to_vec()).unwrap();
        a.transform(rows[cut..].to_vec()).unwrap();
        let mut b = Engine::new(small_config()).unwrap();
        b.fit(rows.clone()).unwrap();
        let (sa, sb) = (a.snapshot(), b.snapshot());
        prop_assert_eq!(&sa.edges, &sb.edges);
        prop_assert_eq!(&sa.seen, &sb.seen);
        prop_assert_eq!(sa.t_now, sb.t_now);
        for v in 0..a.graph().vertex_count() as u32 {
            let key = a.graph().account_key(txmotif_core::VertexId(v)).unwrap();
            let w = b.graph().vertex_id(key).unwrap();
            for dir in txmotif_core::Direction::BOTH {
                for attr in 0..2 {
                    let (x, y) = (
                        a.vertex_stats().accumulator(txmotif_core::VertexId(v), dir, attr),
                        b.vertex_stats().accumulator(w, dir, attr),
                    );
                    prop_assert_eq!(x.n, y.n);
                    prop_assert!((x.mean() - y.mean()).abs() <= 1e-9 * x.mean().abs().max(1.0));
                    prop_assert!((x.variance() - y.variance()).abs() <= 1e-9 * x.variance().max(1.0));
                }
            }
        }
    }

    /// With zero-width pattern windows and no statistics, a row depends only
    /// on edges sharing its timestamp, so batching does not matter.
    #[test]
    fn zero_windows_make_batches_independent(rows in stream(), batch in 1usize..40) {
        let mut c = small_config();
        // retention must cover the whole stream, or batch-end eviction
        // reaches back into earlier rows of a large batch
        c.window.delta = 1_000;
        c.patterns = PatternWindows { scatter_gather: 0, simple_cycle: 0, temporal_cycle: 0, fan: Some(0) };
        c.stats.enabled.clear();
        c.stats.attributes.clear();
        // distinct timestamps so no two rows share an instant
        let rows: Vec<_> = rows.into_iter().enumerate().map(|(i, mut t)| { t.timestamp = i as i64 * 3; t }).collect();
        let mut whole = Engine::new(c.clone()).unwrap();
        let all = whole.transform(rows.clone()).unwrap().rows;
        let mut chunked = Engine::new(c).unwrap();
        let mut parts = Vec::new();
        for chunk in rows.chunks(batch) {
            parts.extend(chunked.transform(chunk.to_vec()).unwrap().rows);
        }
        prop_assert_eq!(all, parts);
    }

    #[test]
    fn worker_count_does_not_change_rows(rows in stream()) {
        let mut c1 = small_config();
        c1.worker_count = 1;
        let mut c4 = c1.clone();
        c4.worker_count = 4;
        let a = Engine::new(c1).unwrap().transform(rows.clone()).unwrap();
        let b = Engine::new(c4).unwrap().transform(rows).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn default_schema_names() {
    let e = Engine::new(EngineConfig::default()).unwrap();
    let names: Vec<&str> = e.schema().names().collect();
    assert_eq!(&names[..4], &["EdgeID", "Timestamp", "Amount", "row_flag"]);
    assert_eq!(names[4], "cycle_len_2");
    for n in ["src_fan_in", "dst_fan_out", "src_gather_scatter", "dst_in_timestamp_kurtosis", "src_out_amount_median_present"] {
        assert!(names.contains(&n), "{n}");
    }
    // 3 basic + flag, 9 + 29 + 9 bins, 2 endpoints * (3 + 2 dirs * 2 attrs * 8 stats * 2)
    assert_eq!(names.len(), 4 + 9 + 29 + 9 + 2 * (3 + 64));
}

#[test]
fn params_round_trip() {
    let mut e = Engine::new(small_config()).unwrap();
    let p = e.get_params();
    e.set_params(p.clone()).unwrap();
    assert_eq!(e.get_params(), p);
    let mut bad = p;
    bad.patterns.simple_cycle = -1;
    assert!(matches!(e.set_params(bad), Err(Error::Config(_))));
}

#[test]
fn stale_row_still_sees_cycle() {
    let mut c = small_config();
    c.window.delta = 10;
    c.patterns = PatternWindows { scatter_gather: 10, simple_cycle: 10, temporal_cycle: 10, fan: None };
    let mut e = Engine::new(c).unwrap();
    e.fit(vec![Transaction::new(1, "a", "b", 100, vec![1.0])]).unwrap();
    let out = e.transform(vec![Transaction::new(2, "b", "a", 95, vec![1.0])]).unwrap();
    assert_eq!(out.flags, vec![RowFlag::Ok]);
    let out = e.transform(vec![Transaction::new(3, "b", "a", 80, vec![1.0])]).unwrap();
    assert_eq!(out.flags, vec![RowFlag::Stale]);
    let col = e.schema().position("row_flag").unwrap();
    assert_eq!(out.rows[0].values[col], FeatureValue::UInt(RowFlag::Stale.code() as u64));
}
