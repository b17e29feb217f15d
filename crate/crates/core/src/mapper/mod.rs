//! Mapper graphs: a lens maps each point to a real value, an overlapping
//! interval cover stratifies those values, each stratum is clustered, and
//! clusters that share points are joined by an edge.

mod dot;
mod graph;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{distance_matrix, DistanceMatrix, Metric, PointCloud};
use crate::union_find::UnionFind;

pub use dot::graph_to_dot;
pub use graph::{graph_from_json, graph_to_json, MapperEdge, MapperGraph, MapperNode};

/// Real-valued filter function applied before covering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Lens {
    /// Projection on the `index`-th principal axis.
    Pca { index: usize },
    /// `(Σ_q d(p, q)^e / n)^(1/e)`, the sum running over every point.
    Eccentricity { exponent: f64 },
    /// Gaussian kernel density estimate.
    Density { bandwidth: f64 },
    /// A raw coordinate.
    Coordinate { index: usize },
}

impl Default for Lens {
    fn default() -> Self {
        Lens::Pca { index: 0 }
    }
}

/// One lens value per point of `cloud`. `dm` must be the cloud's distance matrix.
pub fn apply_lens(cloud: &PointCloud, lens: Lens, dm: &DistanceMatrix) -> Result<Vec<f64>> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if dm.len() != cloud.len() {
        return Err(Error::DimensionMismatch {
            expected: cloud.len(),
            found: dm.len(),
        });
    }
    let n = cloud.len();
    let values = match lens {
        Lens::Coordinate { index } => {
            if index >= cloud.dim() {
                return Err(Error::BadLens(format!(
                    "coordinate {index} out of range for dimension {}",
                    cloud.dim()
                )));
            }
            cloud.points().iter().map(|p| p[index]).collect()
        }
        Lens::Eccentricity { exponent } => {
            if !(exponent > 0.0 && exponent.is_finite()) {
                return Err(Error::BadLens(format!("eccentricity exponent {exponent}")));
            }
            (0..n)
                .map(|i| {
                    let s: f64 = dm.row(i).iter().map(|d| d.powf(exponent)).sum();
                    (s / n as f64).powf(1.0 / exponent)
                })
                .collect()
        }
        Lens::Density { bandwidth } => {
            if !(bandwidth > 0.0 && bandwidth.is_finite()) {
                return Err(Error::BadLens(format!("density bandwidth {bandwidth}")));
            }
            let two_h2 = 2.0 * bandwidth * bandwidth;
            let norm = (std::f64::consts::PI * two_h2).powf(-(cloud.dim() as f64) / 2.0) / n as f64;
            (0..n)
                .map(|i| norm * dm.row(i).iter().map(|d| (-d * d / two_h2).exp()).sum::<f64>())
                .collect()
        }
        Lens::Pca { index } => pca_projection(cloud, index)?,
    };
    Ok(values)
}

fn pca_projection(cloud: &PointCloud, index: usize) -> Result<Vec<f64>> {
    let (n, d) = (cloud.len(), cloud.dim());
    if index >= d {
        return Err(Error::BadLens(format!("principal axis {index} out of range for dimension {d}")));
    }
    if n < 2 {
        return Err(Error::DegenerateCovariance);
    }
    let mean: Vec<f64> = (0..d)
        .map(|c| cloud.points().iter().map(|p| p[c]).sum::<f64>() / n as f64)
        .collect();
    let centered = DMatrix::from_fn(n, d, |r, c| cloud.point(r)[c] - mean[c]);
    let cov = centered.transpose() * &centered / (n - 1) as f64;
    if cov.trace() <= 0.0 {
        return Err(Error::DegenerateCovariance);
    }
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut axis: Vec<f64> = eig.eigenvectors.column(order[index]).iter().copied().collect();
    // sign convention: the largest-magnitude loading is positive
    let pivot = axis
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if v.abs() > axis[best].abs() { i } else { best });
    if axis[pivot] < 0.0 {
        axis.iter_mut().for_each(|v| *v = -*v);
    }
    Ok((0..n)
        .map(|r| centered.row(r).iter().zip(&axis).map(|(x, a)| x * a).sum())
        .collect())
}

/// Uniform overlapping intervals over the lens range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cover {
    pub intervals: Vec<(f64, f64)>,
    pub overlap_frac: f64,
    /// Common interval length.
    pub length: f64,
}

impl Cover {
    pub fn n_intervals(&self) -> usize {
        self.intervals.len()
    }

    /// Indices of the (closed) intervals containing `v`.
    pub fn containing(&self, v: f64) -> impl Iterator<Item = usize> + '_ {
        self.intervals
            .iter()
            .enumerate()
            .filter(move |(_, &(lo, hi))| lo <= v && v <= hi)
            .map(|(i, _)| i)
    }
}

/// `n` intervals of length `L = range / (n - (n - 1) g)` advancing by
/// `L (1 - g)`, flush with both ends of the value range.
pub fn build_cover(values: &[f64], n_intervals: usize, overlap_frac: f64) -> Result<Cover> {
    if !(0.0..=0.9).contains(&overlap_frac) {
        return Err(Error::BadOverlap(overlap_frac));
    }
    if n_intervals == 0 {
        return Err(Error::BadIntervals);
    }
    if values.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(min.is_finite() && max.is_finite()) {
        return Err(Error::BadLens("lens produced a non-finite value".into()));
    }
    let range = max - min;
    if range == 0.0 {
        return Ok(Cover {
            intervals: vec![(min - 1e-9, max + 1e-9)],
            overlap_frac,
            length: 2e-9,
        });
    }
    let n = n_intervals as f64;
    let length = range / (n - (n - 1.0) * overlap_frac);
    let step = length * (1.0 - overlap_frac);
    let starts: Vec<f64> = (0..n_intervals).map(|i| min + i as f64 * step).collect();
    let intervals = (0..n_intervals)
        .map(|i| {
            let hi = if i + 1 == n_intervals {
                max
            } else {
                // never leave a rounding gap before the next interval
                (starts[i] + length).max(starts[i + 1])
            };
            (starts[i], hi)
        })
        .collect();
    Ok(Cover {
        intervals,
        overlap_frac,
        length,
    })
}

/// Clustering used inside each cover element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClusterMethod {
    /// Single linkage cut at the first empty bin of the merge-distance histogram.
    SingleLinkageGap { n_bins: usize },
    /// Connected components of the graph with edges of length `<= eps`.
    FixedThreshold { eps: f64 },
}

impl Default for ClusterMethod {
    fn default() -> Self {
        ClusterMethod::SingleLinkageGap { n_bins: 10 }
    }
}

/// Partitions `0..member_dm.len()` into clusters, each sorted, ordered by
/// smallest member.
pub fn cluster_preimage(member_dm: &DistanceMatrix, method: ClusterMethod) -> Result<Vec<Vec<usize>>> {
    let n = member_dm.len();
    match method {
        ClusterMethod::SingleLinkageGap { n_bins: 0 } => {
            return Err(Error::BadClustering("n_bins must be at least 1".into()))
        }
        ClusterMethod::FixedThreshold { eps } if !(eps >= 0.0) => {
            return Err(Error::BadClustering(format!("eps {eps} must be non-negative")))
        }
        _ => {}
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut uf = UnionFind::new(n);
    match method {
        ClusterMethod::FixedThreshold { eps } => {
            for i in 0..n {
                for j in 0..i {
                    if member_dm.get(i, j) <= eps {
                        uf.union(i, j);
                    }
                }
            }
        }
        ClusterMethod::SingleLinkageGap { n_bins } => {
            let merges = minimum_spanning_edges(member_dm);
            if let Some(cut) = histogram_gap(&merges, n_bins) {
                for &(a, b, w) in &merges {
                    if w < cut {
                        uf.union(a, b);
                    }
                }
            } else {
                return Ok(vec![(0..n).collect()]);
            }
        }
    }
    Ok(uf.groups())
}

/// Prim's algorithm on a dense matrix; the edge weights are exactly the
/// single-linkage merge heights.
fn minimum_spanning_edges(dm: &DistanceMatrix) -> Vec<(usize, usize, f64)> {
    let n = dm.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![0; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        for v in 0..n {
            if !in_tree[v] && dm.get(current, v) < best[v] {
                best[v] = dm.get(current, v);
                parent[v] = current;
            }
        }
        let next = (0..n)
            .filter(|&v| !in_tree[v])
            .min_by(|&a, &b| best[a].total_cmp(&best[b]).then(a.cmp(&b)))
            .expect("a vertex remains outside the tree");
        in_tree[next] = true;
        edges.push((parent[next], next, best[next]));
        current = next;
    }
    edges
}

/// Left edge of the first empty histogram bin, or `None` if every bin is hit.
fn histogram_gap(merges: &[(usize, usize, f64)], n_bins: usize) -> Option<f64> {
    if merges.is_empty() {
        return None;
    }
    let min = merges.iter().map(|e| e.2).fold(f64::INFINITY, f64::min);
    let max = merges.iter().map(|e| e.2).fold(f64::NEG_INFINITY, f64::max);
    if max == min {
        return None;
    }
    let width = (max - min) / n_bins as f64;
    let mut counts = vec![0usize; n_bins];
    for &(_, _, w) in merges {
        let bin = (((w - min) / width) as usize).min(n_bins - 1);
        counts[bin] += 1;
    }
    counts
        .iter()
        .position(|&c| c == 0)
        .map(|bin| min + bin as f64 * width)
}

/// Everything that determines a Mapper graph besides the data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MapperParams {
    pub lens: Lens,
    pub n_intervals: usize,
    pub overlap_frac: f64,
    pub cluster: ClusterMethod,
    pub metric: Metric,
}

impl Default for MapperParams {
    fn default() -> Self {
        Self {
            lens: Lens::default(),
            n_intervals: 6,
            overlap_frac: 0.3,
            cluster: ClusterMethod::default(),
            metric: Metric::Euclidean,
        }
    }
}

pub fn mapper_graph(cloud: &PointCloud, params: &MapperParams) -> Result<MapperGraph> {
    let dm = distance_matrix(cloud, params.metric)?;
    mapper_graph_with(cloud, params, &dm)
}

/// [`mapper_graph`] with a precomputed distance matrix.
pub fn mapper_graph_with(cloud: &PointCloud, params: &MapperParams, dm: &DistanceMatrix) -> Result<MapperGraph> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let values = apply_lens(cloud, params.lens, dm)?;
    let cover = build_cover(&values, params.n_intervals, params.overlap_frac)?;

    let mut preimages: Vec<Vec<usize>> = vec![Vec::new(); cover.n_intervals()];
    for (i, &v) in values.iter().enumerate() {
        for k in cover.containing(v) {
            preimages[k].push(i);
        }
    }

    let mut nodes: Vec<MapperNode> = Vec::new();
    for (interval, members) in preimages.iter().enumerate() {
        let clusters = cluster_preimage(&dm.submatrix(members), params.cluster)?;
        let mut interval_nodes: Vec<MapperNode> = clusters
            .into_iter()
            .map(|cluster| {
                let rows: Vec<usize> = cluster.iter().map(|&c| members[c]).collect();
                MapperNode::from_rows(cloud, interval, &rows)
            })
            .collect();
        interval_nodes.sort_by_key(|node| node.members[0]);
        nodes.extend(interval_nodes);
    }
    for (id, node) in nodes.iter_mut().enumerate() {
        node.id = id;
    }
    Ok(MapperGraph::from_nodes(nodes))
}
