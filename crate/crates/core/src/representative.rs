//! Topology-guided representative selection and novelty detection.
//!
//! Representatives are actual data points: per Mapper node and per class,
//! a handful of medoids. They double as the memory of the nearest-
//! representative classifier and as the reference set for novelty: a point
//! farther than `tau` from every representative is considered unexplained.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapper::{cluster_preimage, ClusterMethod, MapperGraph};
use crate::types::{points_distance_matrix, DistanceMatrix, Metric, PointCloud, QualityClass, DEFAULT_MAX_POINTS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Representative {
    pub id: u64,
    pub vec: Vec<f64>,
    pub label: QualityClass,
    /// Mapper node the representative was selected from; `None` for
    /// operator-adopted representatives.
    pub node: Option<usize>,
    pub stage: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepresentativeSet {
    /// Novelty threshold in metric units; `None` until calibrated.
    pub tau: Option<f64>,
    pub reps: Vec<Representative>,
}

impl RepresentativeSet {
    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    /// Distance from `x` to the closest representative.
    pub fn nearest_distance(&self, x: &[f64], metric: Metric) -> Option<f64> {
        self.reps
            .iter()
            .map(|r| metric.distance(&r.vec, x))
            .min_by(f64::total_cmp)
    }

    /// Indices of the `k` closest representatives (ties by position).
    pub fn k_nearest(&self, x: &[f64], k: usize, metric: Metric) -> Vec<(usize, f64)> {
        let mut d: Vec<(usize, f64)> = self
            .reps
            .iter()
            .enumerate()
            .map(|(i, r)| (i, metric.distance(&r.vec, x)))
            .collect();
        d.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        d.truncate(k);
        d
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("representatives serialize");
        s.push('\n');
        s
    }

    /// Parses and validates the representative-set JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        let set: RepresentativeSet = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        if let Some(tau) = set.tau {
            if !(tau > 0.0 && tau.is_finite()) {
                return Err(Error::DegenerateTau);
            }
        }
        let mut ids = HashSet::new();
        let dim = set.reps.first().map_or(0, |r| r.vec.len());
        for r in &set.reps {
            if !ids.insert(r.id) {
                return Err(Error::DuplicateId(r.id));
            }
            if r.vec.len() != dim || dim == 0 {
                return Err(Error::DimensionMismatch {
                    expected: dim.max(1),
                    found: r.vec.len(),
                });
            }
            if r.vec.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { id: r.id });
            }
        }
        Ok(set)
    }
}

/// Picks labeled medoids from every node of `graph`.
///
/// Each node gets `k = max(1, round(budget * size / Σ sizes))` medoids per
/// class present in it (a k-medoids partition of that class's members, seeded
/// with the single best medoid and farthest-point spreading). A point already
/// chosen for an earlier node is not repeated. If the total exceeds `budget`,
/// the node holding the most representatives gives up its last-chosen one
/// until the budget is met; no node drops below one.
pub fn select_representatives(
    graph: &MapperGraph,
    cloud: &PointCloud,
    metric: Metric,
    budget: usize,
    stage: usize,
) -> Result<RepresentativeSet> {
    let labels = cloud.labels().ok_or(Error::UnlabeledCloud)?;
    if budget < graph.nodes.len() {
        return Err(Error::BudgetTooSmall {
            budget,
            nodes: graph.nodes.len(),
        });
    }
    let row_of: HashMap<u64, usize> = cloud.ids().iter().enumerate().map(|(r, &id)| (id, r)).collect();
    let total: usize = graph.total_size();

    let mut chosen: HashSet<usize> = HashSet::new();
    // per node: list of (class, rows in selection order)
    let mut per_node: Vec<Vec<(QualityClass, Vec<usize>)>> = Vec::with_capacity(graph.nodes.len());
    for node in &graph.nodes {
        let rows: Vec<usize> = node
            .members
            .iter()
            .map(|id| {
                row_of
                    .get(id)
                    .copied()
                    .ok_or_else(|| Error::BadGraph(format!("node member {id} is not in the cloud")))
            })
            .collect::<Result<_>>()?;
        let k = ((budget * node.size) as f64 / total as f64).round().max(1.0) as usize;
        let mut by_class: Vec<(QualityClass, Vec<usize>)> = Vec::new();
        let mut classes: Vec<&QualityClass> = rows.iter().map(|&r| &labels[r]).collect();
        classes.sort();
        classes.dedup();
        for class in classes {
            let class_rows: Vec<usize> = rows.iter().copied().filter(|&r| &labels[r] == class).collect();
            let picked: Vec<usize> = k_medoids(cloud, &class_rows, k, metric)
                .into_iter()
                .filter(|r| !chosen.contains(r))
                .collect();
            chosen.extend(&picked);
            if !picked.is_empty() {
                by_class.push((class.clone(), picked));
            }
        }
        if by_class.is_empty() {
            // every medoid was already taken; fall back to the best unused member
            if let Some(r) = best_unused(cloud, &rows, labels, &chosen, metric) {
                chosen.insert(r);
                by_class.push((labels[r].clone(), vec![r]));
            }
        }
        per_node.push(by_class);
    }

    let count = |n: &Vec<(QualityClass, Vec<usize>)>| n.iter().map(|(_, r)| r.len()).sum::<usize>();
    let mut selected: usize = per_node.iter().map(count).sum();
    while selected > budget {
        let Some(victim) = (0..per_node.len())
            .filter(|&i| count(&per_node[i]) > 1)
            .max_by(|&a, &b| {
                count(&per_node[a])
                    .cmp(&count(&per_node[b]))
                    .then(graph.nodes[a].size.cmp(&graph.nodes[b].size))
                    .then(b.cmp(&a))
            })
        else {
            break;
        };
        let classes = &mut per_node[victim];
        let slot = (0..classes.len())
            .max_by(|&a, &b| classes[a].1.len().cmp(&classes[b].1.len()).then(a.cmp(&b)))
            .expect("node has representatives");
        classes[slot].1.pop();
        if classes[slot].1.is_empty() {
            classes.remove(slot);
        }
        selected -= 1;
    }

    let reps = per_node
        .into_iter()
        .enumerate()
        .flat_map(|(node, classes)| {
            classes.into_iter().flat_map(move |(label, rows)| {
                rows.into_iter().map(move |r| Representative {
                    id: cloud.ids()[r],
                    vec: cloud.point(r).to_vec(),
                    label: label.clone(),
                    node: Some(node),
                    stage,
                })
            })
        })
        .collect();
    Ok(RepresentativeSet { tau: None, reps })
}

fn best_unused(
    cloud: &PointCloud,
    rows: &[usize],
    labels: &[QualityClass],
    chosen: &HashSet<usize>,
    metric: Metric,
) -> Option<usize> {
    rows.iter()
        .copied()
        .filter(|r| !chosen.contains(r))
        .map(|r| {
            let cost: f64 = rows
                .iter()
                .filter(|&&q| labels[q] == labels[r])
                .map(|&q| metric.distance(cloud.point(r), cloud.point(q)))
                .sum();
            (r, cost)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(r, _)| r)
}

/// Up to `k` medoid rows of `rows`, first the overall medoid, then points
/// spread by farthest-point insertion, refined by Voronoi iteration. Returns
/// fewer than `k` when there are fewer distinct points.
fn k_medoids(cloud: &PointCloud, rows: &[usize], k: usize, metric: Metric) -> Vec<usize> {
    let m = rows.len();
    if m == 0 || k == 0 {
        return Vec::new();
    }
    let d = |a: usize, b: usize| metric.distance(cloud.point(rows[a]), cloud.point(rows[b]));
    let mut dm = vec![0.0; m * m];
    for a in 0..m {
        for b in 0..a {
            let v = d(a, b);
            dm[a * m + b] = v;
            dm[b * m + a] = v;
        }
    }
    let at = |a: usize, b: usize| dm[a * m + b];
    let medoid_of = |members: &[usize]| -> usize {
        members
            .iter()
            .copied()
            .map(|a| (a, members.iter().map(|&b| at(a, b)).sum::<f64>()))
            .min_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)))
            .expect("non-empty cluster")
            .0
    };

    let all: Vec<usize> = (0..m).collect();
    let mut medoids = vec![medoid_of(&all)];
    let mut nearest: Vec<f64> = (0..m).map(|a| at(a, medoids[0])).collect();
    while medoids.len() < k {
        let (far, dist) = nearest
            .iter()
            .copied()
            .enumerate()
            .max_by(|x, y| x.1.total_cmp(&y.1).then(y.0.cmp(&x.0)))
            .expect("non-empty");
        if dist == 0.0 {
            break;
        }
        medoids.push(far);
        for a in 0..m {
            nearest[a] = nearest[a].min(at(a, far));
        }
    }

    if medoids.len() > 1 {
        for _ in 0..20 {
            let mut clusters: Vec<Vec<usize>> = vec![Vec::new(); medoids.len()];
            for a in 0..m {
                let slot = (0..medoids.len())
                    .min_by(|&x, &y| at(a, medoids[x]).total_cmp(&at(a, medoids[y])).then(x.cmp(&y)))
                    .expect("medoids exist");
                clusters[slot].push(a);
            }
            let updated: Vec<usize> = clusters
                .iter()
                .zip(&medoids)
                .map(|(c, &old)| if c.is_empty() { old } else { medoid_of(c) })
                .collect();
            if updated == medoids {
                break;
            }
            medoids = updated;
        }
        let mut seen = HashSet::new();
        medoids.retain(|x| seen.insert(*x));
    }
    medoids.into_iter().map(|a| rows[a]).collect()
}

/// Linear-interpolation quantile of `values` (which need not be sorted).
pub fn quantile_linear(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Sets `tau` to the `q`-quantile of nearest-representative distances over
/// `calibration`.
pub fn calibrate_tau(
    reps: &RepresentativeSet,
    calibration: &PointCloud,
    metric: Metric,
    q: f64,
) -> Result<RepresentativeSet> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::BadQuantile(q));
    }
    if calibration.is_empty() {
        return Err(Error::EmptyCalibration);
    }
    check_dims(reps, calibration.dim())?;
    let distances: Vec<f64> = calibration
        .points()
        .iter()
        .map(|p| reps.nearest_distance(p, metric).ok_or(Error::EmptyModel))
        .collect::<Result<_>>()?;
    let tau = quantile_linear(&distances, q);
    if !(tau > 0.0) {
        return Err(Error::DegenerateTau);
    }
    Ok(RepresentativeSet {
        tau: Some(tau),
        reps: reps.reps.clone(),
    })
}

/// Like [`calibrate_tau`], but a calibration point that is itself a
/// representative (same id) is measured against the other representatives.
/// Used when the calibration data is the data the representatives came from.
pub fn calibrate_tau_held_out(
    reps: &RepresentativeSet,
    calibration: &PointCloud,
    metric: Metric,
    q: f64,
) -> Result<RepresentativeSet> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::BadQuantile(q));
    }
    check_dims(reps, calibration.dim())?;
    let distances: Vec<f64> = (0..calibration.len())
        .filter_map(|i| {
            let id = calibration.ids()[i];
            reps.reps
                .iter()
                .filter(|r| r.id != id)
                .map(|r| metric.distance(&r.vec, calibration.point(i)))
                .min_by(f64::total_cmp)
        })
        .collect();
    if distances.is_empty() {
        return Err(Error::EmptyCalibration);
    }
    let tau = quantile_linear(&distances, q);
    if !(tau > 0.0) {
        return Err(Error::DegenerateTau);
    }
    Ok(RepresentativeSet {
        tau: Some(tau),
        reps: reps.reps.clone(),
    })
}

fn check_dims(reps: &RepresentativeSet, dim: usize) -> Result<()> {
    match reps.reps.first() {
        None => Err(Error::EmptyModel),
        Some(r) if r.vec.len() != dim => Err(Error::DimensionMismatch {
            expected: r.vec.len(),
            found: dim,
        }),
        Some(_) => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveragePoint {
    pub id: u64,
    pub vec: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoveltyCandidate {
    pub id: usize,
    /// Member point ids, ascending.
    pub members: Vec<u64>,
    pub medoid_id: u64,
    pub medoid: Vec<f64>,
    /// Distance from the medoid to its closest representative.
    pub nearest_rep_distance: f64,
    /// Always `None` from detection; labels come from an operator.
    pub suggested: Option<QualityClass>,
    /// Up to two members spread away from the medoid, adopted alongside it.
    pub coverage: Vec<CoveragePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoveltyReport {
    pub stage: usize,
    pub tau: f64,
    /// Largest first.
    pub candidates: Vec<NoveltyCandidate>,
}

impl NoveltyReport {
    pub fn candidate(&self, id: usize) -> Option<&NoveltyCandidate> {
        self.candidates.iter().find(|c| c.id == id)
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

/// Groups points of `batch` lying farther than `tau` from every
/// representative into candidates (connected components at scale `tau`),
/// keeping those with at least `min_cluster` members.
pub fn detect_novel(
    batch: &PointCloud,
    reps: &RepresentativeSet,
    metric: Metric,
    min_cluster: usize,
    stage: usize,
) -> Result<NoveltyReport> {
    let tau = reps.tau.ok_or(Error::UncalibratedReps)?;
    let empty = NoveltyReport {
        stage,
        tau,
        candidates: Vec::new(),
    };
    if batch.is_empty() {
        return Ok(empty);
    }
    check_dims(reps, batch.dim())?;
    let flagged: Vec<usize> = (0..batch.len())
        .filter(|&i| reps.nearest_distance(batch.point(i), metric).expect("non-empty reps") > tau)
        .collect();
    if flagged.is_empty() {
        return Ok(empty);
    }
    let points: Vec<Vec<f64>> = flagged.iter().map(|&i| batch.point(i).to_vec()).collect();
    let dm = points_distance_matrix(&points, metric, DEFAULT_MAX_POINTS)?;
    let components = cluster_preimage(&dm, ClusterMethod::FixedThreshold { eps: tau })?;

    let mut candidates: Vec<NoveltyCandidate> = components
        .into_iter()
        .filter(|c| c.len() >= min_cluster.max(1))
        .map(|local| build_candidate(batch, reps, metric, &flagged, &dm, &local))
        .collect();
    candidates.sort_by(|a, b| b.members.len().cmp(&a.members.len()).then(a.members[0].cmp(&b.members[0])));
    for (i, c) in candidates.iter_mut().enumerate() {
        c.id = i;
    }
    Ok(NoveltyReport {
        stage,
        tau,
        candidates,
    })
}

fn build_candidate(
    batch: &PointCloud,
    reps: &RepresentativeSet,
    metric: Metric,
    flagged: &[usize],
    dm: &DistanceMatrix,
    local: &[usize],
) -> NoveltyCandidate {
    let id_of = |l: usize| batch.ids()[flagged[l]];
    let medoid = local
        .iter()
        .copied()
        .map(|a| (a, local.iter().map(|&b| dm.get(a, b)).sum::<f64>()))
        .min_by(|x, y| x.1.total_cmp(&y.1).then(id_of(x.0).cmp(&id_of(y.0))))
        .expect("non-empty component")
        .0;
    let mut spread = vec![medoid];
    for _ in 0..2 {
        let far = local
            .iter()
            .copied()
            .map(|a| (a, spread.iter().map(|&s| dm.get(a, s)).fold(f64::INFINITY, f64::min)))
            .max_by(|x, y| x.1.total_cmp(&y.1).then(id_of(y.0).cmp(&id_of(x.0))));
        match far {
            Some((a, d)) if d > 0.0 => spread.push(a),
            _ => break,
        }
    }
    let mut members: Vec<u64> = local.iter().map(|&l| id_of(l)).collect();
    members.sort_unstable();
    let medoid_vec = batch.point(flagged[medoid]).to_vec();
    NoveltyCandidate {
        id: 0,
        members,
        medoid_id: id_of(medoid),
        nearest_rep_distance: reps.nearest_distance(&medoid_vec, metric).expect("non-empty reps"),
        medoid: medoid_vec,
        suggested: None,
        coverage: spread[1..]
            .iter()
            .map(|&l| CoveragePoint {
                id: id_of(l),
                vec: batch.point(flagged[l]).to_vec(),
            })
            .collect(),
    }
}

/// Appends the candidate's medoid and coverage points as representatives
/// carrying the operator's `label`. `tau` is left unchanged.
pub fn adopt_candidate(
    reps: &RepresentativeSet,
    report: &NoveltyReport,
    candidate_id: usize,
    label: QualityClass,
) -> Result<RepresentativeSet> {
    let candidate = report
        .candidate(candidate_id)
        .ok_or(Error::UnknownCandidate(candidate_id))?;
    let existing: HashSet<u64> = reps.reps.iter().map(|r| r.id).collect();
    let mut out = reps.clone();
    let points = std::iter::once((candidate.medoid_id, &candidate.medoid))
        .chain(candidate.coverage.iter().map(|c| (c.id, &c.vec)));
    for (id, vec) in points {
        if existing.contains(&id) {
            return Err(Error::DuplicateId(id));
        }
        out.reps.push(Representative {
            id,
            vec: vec.clone(),
            label: label.clone(),
            node: None,
            stage: report.stage,
        });
    }
    Ok(out)
}
