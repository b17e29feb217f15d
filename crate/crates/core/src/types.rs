//! Point clouds, quality classes, metrics and dense distance matrices.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default upper bound on the number of points a dense distance matrix may hold.
pub const DEFAULT_MAX_POINTS: usize = 5000;

/// Quality label of a part.
///
/// The derived ordering (Original < Uncured < Cured < Damaged < operator
/// labels by name) is only used to break ties deterministically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QualityClass {
    Original,
    Uncured,
    Cured,
    Damaged,
    /// A label introduced by an operator during an online update.
    OperatorDefined(String),
}

impl QualityClass {
    pub const BASE: [QualityClass; 4] = [
        QualityClass::Original,
        QualityClass::Uncured,
        QualityClass::Cured,
        QualityClass::Damaged,
    ];
}

impl fmt::Display for QualityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QualityClass::Original => f.write_str("original"),
            QualityClass::Uncured => f.write_str("uncured"),
            QualityClass::Cured => f.write_str("cured"),
            QualityClass::Damaged => f.write_str("damaged"),
            QualityClass::OperatorDefined(name) => write!(f, "op:{name}"),
        }
    }
}

impl FromStr for QualityClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(QualityClass::Original),
            "uncured" => Ok(QualityClass::Uncured),
            "cured" => Ok(QualityClass::Cured),
            "damaged" => Ok(QualityClass::Damaged),
            other => match other.strip_prefix("op:") {
                Some(name) if !name.is_empty() && !name.contains(',') => {
                    Ok(QualityClass::OperatorDefined(name.to_string()))
                }
                _ => Err(Error::UnknownClass(other.to_string())),
            },
        }
    }
}

impl Serialize for QualityClass {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for QualityClass {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A finite set of feature vectors with stable ids and optional labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Vec<f64>>,
    ids: Vec<u64>,
    labels: Option<Vec<QualityClass>>,
    dim: usize,
}

impl PointCloud {
    pub fn new(
        points: Vec<Vec<f64>>,
        ids: Vec<u64>,
        labels: Option<Vec<QualityClass>>,
    ) -> Result<Self> {
        if ids.len() != points.len() {
            return Err(Error::IdCountMismatch {
                points: points.len(),
                ids: ids.len(),
            });
        }
        if let Some(labels) = &labels {
            if labels.len() != points.len() {
                return Err(Error::LabelCountMismatch {
                    points: points.len(),
                    labels: labels.len(),
                });
            }
        }
        let dim = points.first().map_or(0, Vec::len);
        if !points.is_empty() && dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for (p, &id) in points.iter().zip(&ids) {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite { id });
            }
            if !seen.insert(id) {
                return Err(Error::DuplicateId(id));
            }
        }
        Ok(Self {
            points,
            ids,
            labels,
            dim,
        })
    }

    /// Unlabeled cloud with ids `0..n`.
    pub fn from_points(points: Vec<Vec<f64>>) -> Result<Self> {
        let ids = (0..points.len() as u64).collect();
        Self::new(points, ids, None)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Feature dimension; 0 for an empty cloud.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn labels(&self) -> Option<&[QualityClass]> {
        self.labels.as_deref()
    }

    pub fn label(&self, i: usize) -> Option<&QualityClass> {
        self.labels.as_ref().map(|l| &l[i])
    }

    pub fn index_of(&self, id: u64) -> Option<usize> {
        self.ids.iter().position(|&x| x == id)
    }

    /// The sub-cloud made of the given row indices, in that order.
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        PointCloud {
            points: indices.iter().map(|&i| self.points[i].clone()).collect(),
            ids: indices.iter().map(|&i| self.ids[i]).collect(),
            labels: self
                .labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i].clone()).collect()),
            dim: if indices.is_empty() { 0 } else { self.dim },
        }
    }

    pub(crate) fn with_points(&self, points: Vec<Vec<f64>>) -> PointCloud {
        PointCloud {
            points,
            ids: self.ids.clone(),
            labels: self.labels.clone(),
            dim: self.dim,
        }
    }
}

/// Distance function between feature vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
    Manhattan,
    Chebyshev,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        let diffs = a.iter().zip(b).map(|(x, y)| (x - y).abs());
        match self {
            Metric::Euclidean => diffs.map(|d| d * d).sum::<f64>().sqrt(),
            Metric::Manhattan => diffs.sum(),
            Metric::Chebyshev => diffs.fold(0.0, f64::max),
        }
    }
}

/// Symmetric matrix of pairwise distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds a matrix from a full row-major `n * n` buffer, checking symmetry,
    /// the zero diagonal and non-negativity.
    pub fn from_entries(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: entries.len(),
            });
        }
        for i in 0..n {
            if entries[i * n + i] != 0.0 {
                return Err(Error::BadConfig(format!("nonzero diagonal at {i}")));
            }
            for j in 0..i {
                let v = entries[i * n + j];
                if !(v >= 0.0) || v != entries[j * n + i] {
                    return Err(Error::BadConfig(format!("entry ({i},{j}) is invalid")));
                }
            }
        }
        Ok(Self { n, entries })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Restriction to the given indices (in that order).
    pub fn submatrix(&self, indices: &[usize]) -> DistanceMatrix {
        let m = indices.len();
        let mut entries = Vec::with_capacity(m * m);
        for &i in indices {
            for &j in indices {
                entries.push(self.get(i, j));
            }
        }
        DistanceMatrix { n: m, entries }
    }
}

/// Pairwise distances of every point in `cloud`, capped at [`DEFAULT_MAX_POINTS`].
pub fn distance_matrix(cloud: &PointCloud, metric: Metric) -> Result<DistanceMatrix> {
    distance_matrix_capped(cloud, metric, DEFAULT_MAX_POINTS)
}

pub fn distance_matrix_capped(
    cloud: &PointCloud,
    metric: Metric,
    cap: usize,
) -> Result<DistanceMatrix> {
    points_distance_matrix(cloud.points(), metric, cap)
}

pub(crate) fn points_distance_matrix(
    points: &[Vec<f64>],
    metric: Metric,
    cap: usize,
) -> Result<DistanceMatrix> {
    let n = points.len();
    if n == 0 {
        return Err(Error::EmptyCloud);
    }
    if n > cap {
        return Err(Error::TooLarge { n, cap });
    }
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..i {
            let d = metric.distance(&points[i], &points[j]);
            entries[i * n + j] = d;
            entries[j * n + i] = d;
        }
    }
    Ok(DistanceMatrix { n, entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizeMode {
    ZScore,
    MinMax,
    #[default]
    None,
}

/// Rescales every coordinate independently.
///
/// `ZScore` uses the mean and the standard deviation over the cloud's own
/// points (divisor `n`); constant coordinates are left as they are. `MinMax`
/// maps each coordinate onto `[0, 1]`, constant coordinates onto 0.
pub fn normalize(cloud: &PointCloud, mode: NormalizeMode) -> Result<PointCloud> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if mode == NormalizeMode::None {
        return Ok(cloud.clone());
    }
    let n = cloud.len() as f64;
    let mut points = cloud.points().to_vec();
    for c in 0..cloud.dim() {
        let column = || cloud.points().iter().map(|p| p[c]);
        let min = column().fold(f64::INFINITY, f64::min);
        let max = column().fold(f64::NEG_INFINITY, f64::max);
        let constant = min == max;
        match mode {
            NormalizeMode::ZScore => {
                if constant {
                    continue;
                }
                let mean = column().sum::<f64>() / n;
                let var = column().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
                let std = var.sqrt();
                for p in &mut points {
                    p[c] = (p[c] - mean) / std;
                }
            }
            NormalizeMode::MinMax => {
                for p in &mut points {
                    p[c] = if constant {
                        0.0
                    } else {
                        ((p[c] - min) / (max - min)).clamp(0.0, 1.0)
                    };
                }
            }
            NormalizeMode::None => unreachable!(),
        }
    }
    Ok(cloud.with_points(points))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(points: &[&[f64]]) -> PointCloud {
        PointCloud::from_points(points.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    #[test]
    fn class_names_round_trip() {
        for c in QualityClass::BASE {
            assert_eq!(c.to_string().parse::<QualityClass>().unwrap(), c);
        }
        let op: QualityClass = "op:porous".parse().unwrap();
        assert_eq!(op, QualityClass::OperatorDefined("porous".into()));
        assert_eq!(op.to_string(), "op:porous");
        assert!("Cured".parse::<QualityClass>().is_err());
        assert!("op:".parse::<QualityClass>().is_err());
    }

    #[test]
    fn class_order_is_fixed() {
        assert!(QualityClass::Original < QualityClass::Uncured);
        assert!(QualityClass::Uncured < QualityClass::Cured);
        assert!(QualityClass::Cured < QualityClass::Damaged);
        assert!(QualityClass::Damaged < QualityClass::OperatorDefined("a".into()));
    }

    #[test]
    fn cloud_invariants() {
        assert!(matches!(
            PointCloud::new(vec![vec![0.0], vec![1.0, 2.0]], vec![0, 1], None),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            PointCloud::new(vec![vec![0.0], vec![1.0]], vec![3, 3], None),
            Err(Error::DuplicateId(3))
        ));
        assert!(matches!(
            PointCloud::new(vec![vec![0.0]], vec![0], Some(vec![])),
            Err(Error::LabelCountMismatch { .. })
        ));
        assert!(matches!(
            PointCloud::new(vec![vec![f64::NAN]], vec![9], None),
            Err(Error::NonFinite { id: 9 })
        ));
    }

    #[test]
    fn distance_examples() {
        let dm = distance_matrix(&cloud(&[&[0.0], &[3.0]]), Metric::Euclidean).unwrap();
        assert_eq!(dm.row(0), &[0.0, 3.0]);
        assert_eq!(dm.row(1), &[3.0, 0.0]);
        let dm = distance_matrix(&cloud(&[&[0.0, 0.0], &[1.0, 1.0]]), Metric::Manhattan).unwrap();
        assert_eq!(dm.get(0, 1), 2.0);
        let dm = distance_matrix(&cloud(&[&[0.0, 0.0], &[3.0, 4.0]]), Metric::Euclidean).unwrap();
        assert_eq!(dm.get(1, 0), 5.0);
        let dm = distance_matrix(&cloud(&[&[0.0, 0.0], &[3.0, 4.0]]), Metric::Chebyshev).unwrap();
        assert_eq!(dm.get(1, 0), 4.0);
    }

    #[test]
    fn distance_errors() {
        let empty = PointCloud::from_points(vec![]).unwrap();
        assert_eq!(
            distance_matrix(&empty, Metric::Euclidean),
            Err(Error::EmptyCloud)
        );
        let c = cloud(&[&[0.0], &[1.0], &[2.0]]);
        assert_eq!(
            distance_matrix_capped(&c, Metric::Euclidean, 2),
            Err(Error::TooLarge { n: 3, cap: 2 })
        );
    }

    #[test]
    fn minmax_endpoints() {
        let out = normalize(&cloud(&[&[0.0], &[2.0]]), NormalizeMode::MinMax).unwrap();
        assert_eq!(out.points(), &[vec![0.0], vec![1.0]]);
    }

    #[test]
    fn zscore_by_hand() {
        // mean 2, deviations -1 and 1, std over the two points = 1
        let out = normalize(&cloud(&[&[1.0, 5.0], &[3.0, 5.0]]), NormalizeMode::ZScore).unwrap();
        assert_eq!(out.points(), &[vec![-1.0, 5.0], vec![1.0, 5.0]]);
    }

    #[test]
    fn none_is_identity_and_empty_fails() {
        let c = PointCloud::new(
            vec![vec![1.5, -2.0], vec![0.0, 7.0]],
            vec![10, 4],
            Some(vec![QualityClass::Cured, QualityClass::Damaged]),
        )
        .unwrap();
        assert_eq!(normalize(&c, NormalizeMode::None).unwrap(), c);
        let empty = PointCloud::from_points(vec![]).unwrap();
        assert_eq!(normalize(&empty, NormalizeMode::ZScore), Err(Error::EmptyCloud));
    }

    #[test]
    fn from_entries_validates() {
        assert!(DistanceMatrix::from_entries(2, vec![0.0, 1.0, 1.0, 0.0]).is_ok());
        assert!(DistanceMatrix::from_entries(2, vec![0.0, 1.0, 2.0, 0.0]).is_err());
        assert!(DistanceMatrix::from_entries(2, vec![1.0, 1.0, 1.0, 0.0]).is_err());
    }
}
