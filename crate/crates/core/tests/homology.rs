use std::collections::VecDeque;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use soq_core::fixtures::uniform_cloud;
use soq_core::persistence::{
    barcode, bottleneck_distance, compute_persistence, compute_persistence_full, h0_union_find, rips_filtration,
    rips_persistence, PersistenceDiagram, PersistencePair,
};
use soq_core::types::{distance_matrix, DistanceMatrix, Metric, PointCloud};

/// Components of the graph with an edge wherever the distance is at most `scale`.
fn bfs_components(dm: &DistanceMatrix, scale: f64) -> usize {
    let n = dm.len();
    let mut seen = vec![false; n];
    let mut count = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for w in 0..n {
                if !seen[w] && dm.get(v, w) <= scale {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    count
}

#[test]
fn union_find_and_reduction_agree_on_random_clouds() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let n = rng.gen_range(1..=40);
        let d = rng.gen_range(1..=5);
        let cloud = uniform_cloud(&mut rng, n, d);
        let dm = distance_matrix(&cloud, Metric::Euclidean).unwrap();
        let scale = rng.gen_range(0.05..1.5);
        let f = rips_filtration(&dm, scale, 1).unwrap();
        let full = compute_persistence_full(&f);
        assert_eq!(full.pairs(0), h0_union_find(&f).as_slice());
        assert_eq!(full.infinite_count(0), bfs_components(&dm, scale));
    }
}

#[test]
fn square_has_one_loop() {
    let cloud = PointCloud::from_points(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
    let d = rips_persistence(&distance_matrix(&cloud, Metric::Euclidean).unwrap(), 2.0, 1).unwrap();
    assert_eq!(d.pairs(1).len(), 1);
    let p = d.pairs(1)[0];
    assert!((p.birth - 1.0).abs() < 1e-9 && (p.death - 2f64.sqrt()).abs() < 1e-9);
    let bars: Vec<_> = barcode(&d).bars_in(1).copied().collect();
    assert_eq!(bars.len(), 1);
}

#[test]
fn relabeling_points_does_not_change_the_diagram() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..30 {
        let cloud = uniform_cloud(&mut rng, 15, 3);
        let mut order: Vec<usize> = (0..15).collect();
        for i in (1..15).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        let shuffled = cloud.select(&order);
        let a = rips_persistence(&distance_matrix(&cloud, Metric::Euclidean).unwrap(), 2.0, 1).unwrap();
        let b = rips_persistence(&distance_matrix(&shuffled, Metric::Euclidean).unwrap(), 2.0, 1).unwrap();
        assert_eq!(a, b);
    }
}

fn perturb(cloud: &PointCloud, rng: &mut ChaCha8Rng, radius: f64) -> PointCloud {
    let points = cloud
        .points()
        .iter()
        .map(|p| {
            let dir: Vec<f64> = p.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
            let len = rng.gen_range(0.0..=radius);
            p.iter().zip(&dir).map(|(x, u)| x + u / norm * len).collect()
        })
        .collect();
    PointCloud::from_points(points).unwrap()
}

#[test]
fn small_perturbations_move_diagrams_little() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for delta in [1e-3, 1e-2] {
        for _ in 0..10 {
            let cloud = uniform_cloud(&mut rng, 20, 2);
            // moving each point at most δ/2 changes every distance by at most δ
            let moved = perturb(&cloud, &mut rng, delta / 2.0);
            let a = rips_persistence(&distance_matrix(&cloud, Metric::Euclidean).unwrap(), f64::INFINITY, 1).unwrap();
            let b = rips_persistence(&distance_matrix(&moved, Metric::Euclidean).unwrap(), f64::INFINITY, 1).unwrap();
            for dim in [0, 1] {
                assert!(bottleneck_distance(&a, &b, dim).unwrap() <= delta + 1e-9);
            }
        }
    }
}

fn finite_diagram() -> impl Strategy<Value = PersistenceDiagram> {
    prop::collection::vec((0.0f64..5.0, 0.0f64..3.0), 0..6).prop_map(|pairs| {
        PersistenceDiagram::new(
            pairs.into_iter().map(|(b, l)| PersistencePair::new(b, b + l)).collect(),
            Vec::new(),
        )
    })
}

proptest! {
    #[test]
    fn bottleneck_is_a_metric_on_samples(a in finite_diagram(), b in finite_diagram(), c in finite_diagram()) {
        let ab = bottleneck_distance(&a, &b, 0).unwrap();
        let ba = bottleneck_distance(&b, &a, 0).unwrap();
        let bc = bottleneck_distance(&b, &c, 0).unwrap();
        let ac = bottleneck_distance(&a, &c, 0).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!(ac <= ab + bc + 1e-9);
        prop_assert_eq!(bottleneck_distance(&a, &a, 0).unwrap(), 0.0);
    }

    #[test]
    fn h0_has_one_infinite_bar_per_component(seed in any::<u64>(), n in 1usize..25, scale in 0.05f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cloud = uniform_cloud(&mut rng, n, 2);
        let dm = distance_matrix(&cloud, Metric::Euclidean).unwrap();
        let d = compute_persistence(&rips_filtration(&dm, scale, 0).unwrap());
        prop_assert_eq!(d.infinite_count(0), bfs_components(&dm, scale));
        prop_assert!(d.pairs(0).iter().all(|p| p.death >= p.birth));
    }
}
