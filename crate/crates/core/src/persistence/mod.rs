//! Vietoris–Rips filtrations and persistent homology in dimensions 0 and 1.
//!
//! Persistence pairs come from the standard column reduction of the boundary
//! matrix over the two-element field. Dimension 0 is also available through a
//! union-find sweep ([`h0_union_find`]), which must agree with the reduction.

mod bottleneck;
mod json;

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::DistanceMatrix;
use crate::union_find::UnionFind;

pub use bottleneck::bottleneck_distance;
pub use json::{diagram_from_json, diagram_to_json};

/// A vertex, edge or triangle together with the scale at which it enters.
#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    /// Sorted vertex indices; 1 to 3 of them.
    pub vertices: Vec<usize>,
    pub birth: f64,
}

impl Simplex {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }
}

fn filtration_order(a: &Simplex, b: &Simplex) -> Ordering {
    a.birth
        .total_cmp(&b.birth)
        .then(a.vertices.len().cmp(&b.vertices.len()))
        .then_with(|| a.vertices.cmp(&b.vertices))
}

/// Simplices sorted by (birth, dimension, lexicographic vertices).
#[derive(Debug, Clone, PartialEq)]
pub struct Filtration {
    simplices: Vec<Simplex>,
    n_vertices: usize,
    max_dim: usize,
}

impl Filtration {
    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    /// Highest homology dimension the filtration was built for.
    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }
}

/// Rips filtration of a distance matrix up to `max_scale`.
///
/// Triangles are added only when `max_dim` is 1, since they are needed to
/// kill one-dimensional classes and play no other role here.
pub fn rips_filtration(dm: &DistanceMatrix, max_scale: f64, max_dim: usize) -> Result<Filtration> {
    if !(max_scale > 0.0) {
        return Err(Error::BadScale(max_scale));
    }
    if max_dim > 1 {
        return Err(Error::UnsupportedDimension(max_dim));
    }
    let n = dm.len();
    let mut simplices: Vec<Simplex> = (0..n)
        .map(|v| Simplex {
            vertices: vec![v],
            birth: 0.0,
        })
        .collect();
    for i in 0..n {
        for j in i + 1..n {
            let d = dm.get(i, j);
            if d <= max_scale {
                simplices.push(Simplex {
                    vertices: vec![i, j],
                    birth: d,
                });
            }
        }
    }
    if max_dim == 1 {
        for i in 0..n {
            for j in i + 1..n {
                let dij = dm.get(i, j);
                if dij > max_scale {
                    continue;
                }
                for k in j + 1..n {
                    let (dik, djk) = (dm.get(i, k), dm.get(j, k));
                    if dik <= max_scale && djk <= max_scale {
                        simplices.push(Simplex {
                            vertices: vec![i, j, k],
                            birth: dij.max(dik).max(djk),
                        });
                    }
                }
            }
        }
    }
    simplices.sort_by(filtration_order);
    Ok(Filtration {
        simplices,
        n_vertices: n,
        max_dim,
    })
}

/// A (birth, death) pair; `death` is `f64::INFINITY` for essential classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PersistencePair {
    pub birth: f64,
    pub death: f64,
}

impl PersistencePair {
    pub fn new(birth: f64, death: f64) -> Self {
        Self { birth, death }
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    pub fn is_infinite(&self) -> bool {
        self.death.is_infinite()
    }

    fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.birth
            .total_cmp(&other.birth)
            .then(self.death.total_cmp(&other.death))
    }
}

/// Multisets of persistence pairs for dimensions 0 and 1, each kept sorted
/// by (birth, death).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PersistenceDiagram {
    h0: Vec<PersistencePair>,
    h1: Vec<PersistencePair>,
}

impl PersistenceDiagram {
    pub fn new(mut h0: Vec<PersistencePair>, mut h1: Vec<PersistencePair>) -> Self {
        h0.sort_by(PersistencePair::canonical_cmp);
        h1.sort_by(PersistencePair::canonical_cmp);
        Self { h0, h1 }
    }

    pub fn pairs(&self, dim: usize) -> &[PersistencePair] {
        match dim {
            0 => &self.h0,
            1 => &self.h1,
            _ => &[],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.h0.is_empty() && self.h1.is_empty()
    }

    /// Same diagram with every birth == death pair removed.
    pub fn without_zero_persistence(&self) -> Self {
        let keep = |v: &[PersistencePair]| v.iter().copied().filter(|p| p.death > p.birth).collect();
        Self {
            h0: keep(&self.h0),
            h1: keep(&self.h1),
        }
    }

    /// Longest finite-or-infinite bar in `dim`, if any.
    pub fn max_persistence(&self, dim: usize) -> Option<f64> {
        self.pairs(dim)
            .iter()
            .map(PersistencePair::persistence)
            .max_by(f64::total_cmp)
    }

    pub fn infinite_count(&self, dim: usize) -> usize {
        self.pairs(dim).iter().filter(|p| p.is_infinite()).count()
    }
}

/// Persistence diagram without zero-persistence pairs.
pub fn compute_persistence(f: &Filtration) -> PersistenceDiagram {
    compute_persistence_full(f).without_zero_persistence()
}

/// Persistence diagram including pairs with birth == death.
pub fn compute_persistence_full(f: &Filtration) -> PersistenceDiagram {
    let simplices = f.simplices();
    let mut index: HashMap<&[usize], usize> = HashMap::with_capacity(simplices.len());
    for (i, s) in simplices.iter().enumerate() {
        index.insert(s.vertices.as_slice(), i);
    }

    // Boundary columns as sorted row lists; faces always precede cofaces.
    let mut columns: Vec<Vec<usize>> = simplices
        .iter()
        .map(|s| {
            let mut col: Vec<usize> = match s.vertices.as_slice() {
                [_] => Vec::new(),
                &[a, b] => vec![index[&[a][..]], index[&[b][..]]],
                &[a, b, c] => vec![index[&[a, b][..]], index[&[a, c][..]], index[&[b, c][..]]],
                _ => unreachable!("simplices have at most three vertices"),
            };
            col.sort_unstable();
            col
        })
        .collect();

    let mut pivot_owner: Vec<Option<usize>> = vec![None; simplices.len()];
    let mut scratch = Vec::new();
    for j in 0..columns.len() {
        while let Some(&low) = columns[j].last() {
            let Some(k) = pivot_owner[low] else { break };
            add_column(&mut columns, j, k, &mut scratch);
        }
        if let Some(&low) = columns[j].last() {
            pivot_owner[low] = Some(j);
        }
    }

    let mut h0 = Vec::new();
    let mut h1 = Vec::new();
    let mut paired = vec![false; simplices.len()];
    for (j, col) in columns.iter().enumerate() {
        if let Some(&low) = col.last() {
            paired[low] = true;
            paired[j] = true;
            let pair = PersistencePair::new(simplices[low].birth, simplices[j].birth);
            match simplices[low].dim() {
                0 => h0.push(pair),
                1 => h1.push(pair),
                _ => {}
            }
        }
    }
    for (i, s) in simplices.iter().enumerate() {
        if paired[i] || !columns[i].is_empty() {
            continue;
        }
        let pair = PersistencePair::new(s.birth, f64::INFINITY);
        match s.dim() {
            0 => h0.push(pair),
            1 if f.max_dim() >= 1 => h1.push(pair),
            _ => {}
        }
    }
    PersistenceDiagram::new(h0, h1)
}

/// `columns[target] += columns[source]` over GF(2).
fn add_column(columns: &mut [Vec<usize>], target: usize, source: usize, scratch: &mut Vec<usize>) {
    scratch.clear();
    let (a, b) = (&columns[target], &columns[source]);
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                scratch.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                scratch.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    scratch.extend_from_slice(&a[i..]);
    scratch.extend_from_slice(&b[j..]);
    std::mem::swap(&mut columns[target], scratch);
}

/// Dimension-0 pairs from a union-find sweep over the filtration's vertices
/// and edges (elder rule), including zero-persistence pairs.
pub fn h0_union_find(f: &Filtration) -> Vec<PersistencePair> {
    let n = f.n_vertices();
    let mut uf = UnionFind::new(n);
    let mut root_birth = vec![f64::INFINITY; n];
    let mut pairs = Vec::new();
    for s in f.simplices() {
        match s.vertices.as_slice() {
            [v] => root_birth[*v] = s.birth,
            [a, b] => {
                let (ra, rb) = (uf.find(*a), uf.find(*b));
                if ra == rb {
                    continue;
                }
                let (older, younger) = if root_birth[ra] <= root_birth[rb] {
                    (ra, rb)
                } else {
                    (rb, ra)
                };
                pairs.push(PersistencePair::new(root_birth[younger], s.birth));
                let birth = root_birth[older];
                uf.union(ra, rb);
                let root = uf.find(ra);
                root_birth[root] = birth;
            }
            _ => {}
        }
    }
    let mut seen = vec![false; n];
    for v in 0..n {
        let r = uf.find(v);
        if !seen[r] {
            seen[r] = true;
            pairs.push(PersistencePair::new(root_birth[r], f64::INFINITY));
        }
    }
    pairs.sort_by(PersistencePair::canonical_cmp);
    pairs
}

/// Rips persistence of a distance matrix in one call.
pub fn rips_persistence(dm: &DistanceMatrix, max_scale: f64, max_dim: usize) -> Result<PersistenceDiagram> {
    Ok(compute_persistence(&rips_filtration(dm, max_scale, max_dim)?))
}

/// One interval `[birth, death)` of a barcode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bar {
    pub dim: usize,
    pub birth: f64,
    pub death: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Barcode {
    pub bars: Vec<Bar>,
}

impl Barcode {
    pub fn bars_in(&self, dim: usize) -> impl Iterator<Item = &Bar> {
        self.bars.iter().filter(move |b| b.dim == dim)
    }
}

/// Interval rendering of a diagram, sorted by (dim, birth, death).
pub fn barcode(d: &PersistenceDiagram) -> Barcode {
    let bars = (0..=1)
        .flat_map(|dim| {
            d.pairs(dim).iter().map(move |p| Bar {
                dim,
                birth: p.birth,
                death: p.death,
            })
        })
        .collect();
    Barcode { bars }
}
