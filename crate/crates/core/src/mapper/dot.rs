use std::fmt::Write;

use super::MapperGraph;
use crate::types::QualityClass;

fn fill_color(class: Option<&QualityClass>) -> &'static str {
    match class {
        None => "#ffffff",
        Some(QualityClass::Original) => "#9e9e9e",
        Some(QualityClass::Uncured) => "#1f77b4",
        Some(QualityClass::Cured) => "#2ca02c",
        Some(QualityClass::Damaged) => "#d62728",
        Some(QualityClass::OperatorDefined(_)) => "#ff7f0e",
    }
}

/// Undirected DOT rendering. Fill color is the node's majority class, the
/// label is its size and edge weights are shared-point counts.
pub fn graph_to_dot(g: &MapperGraph) -> String {
    let mut out = format!(
        "// mapper graph: {} nodes, {} edges\n",
        g.nodes.len(),
        g.edges.len()
    );
    if g.nodes.is_empty() {
        out.push_str("graph soq {}\n");
        return out;
    }
    out.push_str("graph soq {\n  node [shape=circle, style=filled];\n");
    for node in &g.nodes {
        let majority = node.majority().map(|(c, _)| c);
        let _ = writeln!(
            out,
            "  n{} [label=\"{}\", fillcolor=\"{}\", class=\"{}\"];",
            node.id,
            node.size,
            fill_color(majority),
            majority.map(ToString::to_string).unwrap_or_default()
        );
    }
    for e in &g.edges {
        let _ = writeln!(out, "  n{} -- n{} [weight={}];", e.a, e.b, e.shared);
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapper::{MapperEdge, MapperNode};
    use std::collections::BTreeMap;

    fn node(id: usize, members: Vec<u64>) -> MapperNode {
        MapperNode {
            id,
            interval: id,
            size: members.len(),
            members,
            proportions: BTreeMap::from([(QualityClass::Cured, 1.0)]),
        }
    }

    #[test]
    fn empty_graph() {
        assert_eq!(
            graph_to_dot(&MapperGraph::default()),
            "// mapper graph: 0 nodes, 0 edges\ngraph soq {}\n"
        );
    }

    #[test]
    fn single_node() {
        let dot = graph_to_dot(&MapperGraph {
            nodes: vec![node(0, vec![1, 2])],
            edges: vec![],
        });
        assert_eq!(dot.matches(" [label=").count(), 1);
        assert!(dot.contains("n0 [label=\"2\", fillcolor=\"#2ca02c\", class=\"cured\"];"));
        assert!(!dot.contains("--"));
    }

    #[test]
    fn edge_weight_is_shared_count() {
        let dot = graph_to_dot(&MapperGraph {
            nodes: vec![node(0, vec![1, 2, 3]), node(1, vec![2, 3])],
            edges: vec![MapperEdge { a: 0, b: 1, shared: 2 }],
        });
        assert_eq!(dot.matches("--").count(), 1);
        assert!(dot.contains("n0 -- n1 [weight=2];"));
    }
}
