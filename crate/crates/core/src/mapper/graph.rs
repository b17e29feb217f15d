use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{PointCloud, QualityClass};
use crate::union_find::UnionFind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapperNode {
    pub id: usize,
    pub interval: usize,
    /// Point ids, ascending.
    pub members: Vec<u64>,
    pub size: usize,
    /// Class fractions of the members; empty for unlabeled data.
    pub proportions: BTreeMap<QualityClass, f64>,
}

impl MapperNode {
    pub(super) fn from_rows(cloud: &PointCloud, interval: usize, rows: &[usize]) -> Self {
        let mut members: Vec<u64> = rows.iter().map(|&r| cloud.ids()[r]).collect();
        members.sort_unstable();
        let mut proportions = BTreeMap::new();
        if cloud.labels().is_some() {
            let mut counts: BTreeMap<QualityClass, usize> = BTreeMap::new();
            for &r in rows {
                *counts.entry(cloud.label(r).unwrap().clone()).or_default() += 1;
            }
            for (class, count) in counts {
                proportions.insert(class, count as f64 / rows.len() as f64);
            }
        }
        MapperNode {
            id: 0,
            interval,
            members,
            size: rows.len(),
            proportions,
        }
    }

    /// Largest class fraction and its class (ties go to the earlier class).
    pub fn majority(&self) -> Option<(&QualityClass, f64)> {
        self.proportions
            .iter()
            .fold(None, |best: Option<(&QualityClass, f64)>, (c, &f)| match best {
                Some((_, bf)) if bf >= f => best,
                _ => Some((c, f)),
            })
    }

    /// Shannon entropy of the class proportions, in nats.
    pub fn entropy(&self) -> f64 {
        self.proportions
            .values()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.ln())
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapperEdge {
    pub a: usize,
    pub b: usize,
    pub shared: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapperGraph {
    pub nodes: Vec<MapperNode>,
    pub edges: Vec<MapperEdge>,
}

fn shared_count(a: &[u64], b: &[u64]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

impl MapperGraph {
    /// Adds an edge for every pair of nodes with a common member.
    pub(super) fn from_nodes(nodes: Vec<MapperNode>) -> Self {
        let mut edges = Vec::new();
        for a in 0..nodes.len() {
            for b in a + 1..nodes.len() {
                let shared = shared_count(&nodes[a].members, &nodes[b].members);
                if shared > 0 {
                    edges.push(MapperEdge { a, b, shared });
                }
            }
        }
        MapperGraph { nodes, edges }
    }

    pub fn n_components(&self) -> usize {
        let mut uf = UnionFind::new(self.nodes.len());
        for e in &self.edges {
            uf.union(e.a, e.b);
        }
        uf.components()
    }

    pub fn total_size(&self) -> usize {
        self.nodes.iter().map(|n| n.size).sum()
    }

    /// Checks every structural invariant: contiguous ids, sorted unique
    /// members, `size` consistent, proportions summing to one, and edges
    /// present exactly for node pairs with shared members.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::BadGraph(m));
        for (i, node) in self.nodes.iter().enumerate() {
            if node.id != i {
                return bad(format!("node {i} has id {}", node.id));
            }
            if node.members.is_empty() || node.size != node.members.len() {
                return bad(format!("node {i} size does not match its members"));
            }
            if node.members.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("node {i} members are not strictly ascending"));
            }
            if !node.proportions.is_empty() {
                if node.proportions.values().any(|p| !(0.0..=1.0).contains(p)) {
                    return bad(format!("node {i} has a proportion outside [0, 1]"));
                }
                let sum: f64 = node.proportions.values().sum();
                if (sum - 1.0).abs() > 1e-9 {
                    return bad(format!("node {i} proportions sum to {sum}"));
                }
            }
        }
        let expected = MapperGraph::from_nodes(self.nodes.clone()).edges;
        if expected != self.edges {
            return bad("edges do not match the member intersections".into());
        }
        Ok(())
    }
}

/// Pretty-printed graph JSON (deterministic: nodes and edges keep their order,
/// proportions are keyed in class order).
pub fn graph_to_json(g: &MapperGraph) -> String {
    let mut s = serde_json::to_string_pretty(g).expect("graph serializes");
    s.push('\n');
    s
}

pub fn graph_from_json(text: &str) -> Result<MapperGraph> {
    let g: MapperGraph = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    g.validate()?;
    Ok(g)
}
