use proptest::prelude::*;
use soq_core::types::{distance_matrix, normalize, Metric, NormalizeMode, PointCloud};

fn cloud() -> impl Strategy<Value = PointCloud> {
    (1usize..5).prop_flat_map(|d| {
        prop::collection::vec(prop::collection::vec(-100.0f64..100.0, d), 1..25)
            .prop_map(|pts| PointCloud::from_points(pts).unwrap())
    })
}

fn metric() -> impl Strategy<Value = Metric> {
    prop_oneof![Just(Metric::Euclidean), Just(Metric::Manhattan), Just(Metric::Chebyshev)]
}

fn close(a: &PointCloud, b: &PointCloud) -> bool {
    a.points()
        .iter()
        .flatten()
        .zip(b.points().iter().flatten())
        .all(|(x, y)| (x - y).abs() <= 1e-9)
}

proptest! {
    #[test]
    fn metric_axioms_on_triples(c in cloud(), m in metric()) {
        let dm = distance_matrix(&c, m).unwrap();
        let n = dm.len();
        for i in 0..n {
            prop_assert_eq!(dm.get(i, i), 0.0);
            for j in 0..n {
                prop_assert_eq!(dm.get(i, j), dm.get(j, i));
                prop_assert!(dm.get(i, j) >= 0.0);
                for k in 0..n.min(6) {
                    prop_assert!(dm.get(i, k) <= dm.get(i, j) + dm.get(j, k) + 1e-9);
                }
            }
        }
    }

    #[test]
    fn normalize_is_idempotent(c in cloud()) {
        for mode in [NormalizeMode::ZScore, NormalizeMode::MinMax] {
            let once = normalize(&c, mode).unwrap();
            let twice = normalize(&once, mode).unwrap();
            prop_assert!(close(&once, &twice));
            prop_assert_eq!(once.ids(), c.ids());
        }
        prop_assert_eq!(normalize(&c, NormalizeMode::None).unwrap(), c);
    }
}
