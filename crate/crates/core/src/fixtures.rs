//! Seeded reference data sets shared by tests, benches and the CLI.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mapper::{ClusterMethod, Lens, MapperParams};
use crate::types::{Metric, PointCloud, QualityClass};

pub const CIRCLE_SEED: u64 = 20;

/// `n` points at uniformly random angles on the unit circle, all labeled Cured.
pub fn circle(n: usize, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| {
            let a = rng.gen_range(0.0..TAU);
            vec![a.cos(), a.sin()]
        })
        .collect();
    PointCloud::new(points, (0..n as u64).collect(), Some(vec![QualityClass::Cured; n])).expect("valid circle")
}

/// Height lens, four intervals at 30% overlap, components at scale 0.5.
pub fn circle_mapper_params() -> MapperParams {
    MapperParams {
        lens: Lens::Coordinate { index: 1 },
        n_intervals: 4,
        overlap_frac: 0.3,
        cluster: ClusterMethod::FixedThreshold { eps: 0.5 },
        metric: Metric::Euclidean,
    }
}

/// Uniform points in `[0, 1)^dim`.
pub fn uniform_cloud(rng: &mut impl Rng, n: usize, dim: usize) -> PointCloud {
    let points = (0..n).map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect()).collect();
    PointCloud::from_points(points).expect("valid cloud")
}
