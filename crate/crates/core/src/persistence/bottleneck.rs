//! Exact bottleneck distance between persistence diagrams.

use super::{PersistenceDiagram, PersistencePair};
use crate::error::{Error, Result};

/// Bottleneck distance between the `dim`-dimensional parts of two diagrams.
///
/// Infinite bars are matched only among themselves (by sorted birth); their
/// counts must agree. The finite part is solved exactly: the answer is one of
/// the pairwise L∞ costs or diagonal costs, so a binary search over those
/// candidates with a perfect-matching feasibility test finds the minimum.
pub fn bottleneck_distance(a: &PersistenceDiagram, b: &PersistenceDiagram, dim: usize) -> Result<f64> {
    if dim > 1 {
        return Err(Error::UnsupportedDimension(dim));
    }
    let (a_fin, mut a_inf) = split(a.pairs(dim));
    let (b_fin, mut b_inf) = split(b.pairs(dim));
    if a_inf.len() != b_inf.len() {
        return Err(Error::InfiniteBarMismatch {
            dim,
            left: a_inf.len(),
            right: b_inf.len(),
        });
    }
    a_inf.sort_by(f64::total_cmp);
    b_inf.sort_by(f64::total_cmp);
    let inf_cost = a_inf
        .iter()
        .zip(&b_inf)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    Ok(inf_cost.max(finite_bottleneck(&a_fin, &b_fin)))
}

fn split(pairs: &[PersistencePair]) -> (Vec<PersistencePair>, Vec<f64>) {
    let mut finite = Vec::new();
    let mut infinite = Vec::new();
    for p in pairs {
        if p.is_infinite() {
            infinite.push(p.birth);
        } else {
            finite.push(*p);
        }
    }
    (finite, infinite)
}

fn linf(p: &PersistencePair, q: &PersistencePair) -> f64 {
    (p.birth - q.birth).abs().max((p.death - q.death).abs())
}

fn diagonal_cost(p: &PersistencePair) -> f64 {
    (p.death - p.birth) / 2.0
}

fn finite_bottleneck(a: &[PersistencePair], b: &[PersistencePair]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let mut candidates: Vec<f64> = Vec::with_capacity(a.len() * b.len() + a.len() + b.len() + 1);
    candidates.push(0.0);
    candidates.extend(a.iter().map(diagonal_cost));
    candidates.extend(b.iter().map(diagonal_cost));
    for p in a {
        for q in b {
            candidates.push(linf(p, q));
        }
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    // The largest candidate (everything to the diagonal, or better) is always feasible.
    let (mut lo, mut hi) = (0, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_matching_exists(a, b, candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

/// Left side: points of `a`, then diagonal copies of `b`'s points.
/// Right side: points of `b`, then diagonal copies of `a`'s points.
fn perfect_matching_exists(a: &[PersistencePair], b: &[PersistencePair], cost: f64) -> bool {
    let (n, m) = (a.len(), b.len());
    let size = n + m;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); size];
    for (i, p) in a.iter().enumerate() {
        for (j, q) in b.iter().enumerate() {
            if linf(p, q) <= cost {
                adj[i].push(j);
            }
        }
        if diagonal_cost(p) <= cost {
            adj[i].push(m + i);
        }
    }
    for (j, q) in b.iter().enumerate() {
        if diagonal_cost(q) <= cost {
            adj[n + j].push(j);
        }
        adj[n + j].extend(m..m + n);
    }
    maximum_matching(&adj, size) == size
}

/// Kuhn's augmenting-path matching; returns the matching size.
fn maximum_matching(adj: &[Vec<usize>], right_size: usize) -> usize {
    let mut match_right: Vec<Option<usize>> = vec![None; right_size];
    let mut size = 0;
    for u in 0..adj.len() {
        let mut visited = vec![false; right_size];
        if augment(u, adj, &mut match_right, &mut visited) {
            size += 1;
        }
    }
    size
}

fn augment(u: usize, adj: &[Vec<usize>], match_right: &mut [Option<usize>], visited: &mut [bool]) -> bool {
    for &v in &adj[u] {
        if visited[v] {
            continue;
        }
        visited[v] = true;
        let free = match match_right[v] {
            None => true,
            Some(w) => augment(w, adj, match_right, visited),
        };
        if free {
            match_right[v] = Some(u);
            return true;
        }
    }
    false
}
