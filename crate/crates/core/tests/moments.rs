use proptest::prelude::*;
use txmotif_core::oracle;
use txmotif_core::stats::scan_stat;
use txmotif_core::{MomentAccumulator, Stat};

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 || (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

fn check(acc: &MomentAccumulator, live: &[f64]) -> Result<(), TestCaseError> {
    match oracle::moments(live) {
        None => prop_assert!(acc.is_empty()),
        Some((mean, var, skew, kurt)) => {
            prop_assert_eq!(acc.n as usize, live.len());
            prop_assert!(close(acc.mean(), mean), "mean {} vs {}", acc.mean(), mean);
            prop_assert!(close(acc.variance(), var), "var {} vs {}", acc.variance(), var);
            prop_assert!(close(acc.skewness(), skew), "skew {} vs {}", acc.skewness(), skew);
            prop_assert!(close(acc.kurtosis(), kurt), "kurt {} vs {}", acc.kurtosis(), kurt);
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn incremental_matches_batch(ops in prop::collection::vec((any::<bool>(), -1e3..1e3f64), 1..300)) {
        let mut acc = MomentAccumulator::new();
        let mut live: Vec<f64> = Vec::new();
        for (insert, x) in ops {
            if insert || live.is_empty() {
                acc.push(x);
                live.push(x);
            } else {
                let y = live.remove(0);
                if acc.remove(y).unwrap() == txmotif_core::stats::Health::Rebuild {
                    acc = MomentAccumulator::from_values(&mut live.clone());
                }
            }
            check(&acc, &live)?;
        }
    }

    #[test]
    fn scan_stats_are_exact(mut values in prop::collection::vec(-1e6..1e6f64, 1..100)) {
        let (min, max, median) = oracle::order_stats(&values).unwrap();
        prop_assert_eq!(scan_stat(&mut values, Stat::Min), Some(min));
        prop_assert_eq!(scan_stat(&mut values, Stat::Max), Some(max));
        prop_assert_eq!(scan_stat(&mut values, Stat::Median), Some(median));
    }

    #[test]
    fn order_does_not_matter(mut values in prop::collection::vec(-1e3..1e3f64, 1..50)) {
        let a = MomentAccumulator::from_values(&mut values.clone());
        values.reverse();
        let b = MomentAccumulator::from_values(&mut values);
        prop_assert_eq!(a, b);
    }
}
