//! Oracles and HTTP helpers shared by the interface test targets.
#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};
use std::path::PathBuf;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use soq_core::mapper::MapperGraph;
use tower::ServiceExt;

/// First Betti number of a graph, |E| - |V| + components, by BFS.
pub fn graph_b1(g: &MapperGraph) -> i64 {
    let n = g.nodes.len();
    let mut adj = vec![Vec::new(); n];
    for e in &g.edges {
        adj[e.a].push(e.b);
        adj[e.b].push(e.a);
    }
    let mut seen = vec![false; n];
    let mut components = 0i64;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        components += 1;
        seen[s] = true;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    q.push_back(w);
                }
            }
        }
    }
    g.edges.len() as i64 - n as i64 + components
}

/// Components of the graph joining points at distance <= `scale`, by BFS.
pub fn bfs_components(points: &[Vec<f64>], scale: f64) -> usize {
    let n = points.len();
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let mut seen = vec![false; n];
    let mut count = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        count += 1;
        seen[s] = true;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for w in 0..n {
                if !seen[w] && dist(&points[v], &points[w]) <= scale {
                    seen[w] = true;
                    q.push_back(w);
                }
            }
        }
    }
    count
}

/// Dimension-1 pairs of the full Rips complex of `points` (every edge and
/// triangle), by a plain column reduction written independently of the
/// library. Zero-length pairs are dropped; essential loops have death = inf.
pub fn oracle_h1(points: &[Vec<f64>]) -> Vec<(f64, f64)> {
    let n = points.len();
    let dist = |a: usize, b: usize| {
        points[a]
            .iter()
            .zip(&points[b])
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    };
    let mut simplices: Vec<(f64, Vec<usize>)> = (0..n).map(|v| (0.0, vec![v])).collect();
    for a in 0..n {
        for b in a + 1..n {
            simplices.push((dist(a, b), vec![a, b]));
            for c in b + 1..n {
                simplices.push((dist(a, b).max(dist(a, c)).max(dist(b, c)), vec![a, b, c]));
            }
        }
    }
    simplices.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.len().cmp(&y.1.len())).then(x.1.cmp(&y.1)));
    let index: HashMap<Vec<usize>, usize> = simplices.iter().enumerate().map(|(i, s)| (s.1.clone(), i)).collect();
    let mut columns: Vec<Vec<usize>> = simplices
        .iter()
        .map(|(_, v)| {
            if v.len() == 1 {
                return Vec::new();
            }
            let mut faces: Vec<usize> = (0..v.len())
                .map(|skip| {
                    let face: Vec<usize> = v.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, &x)| x).collect();
                    index[&face]
                })
                .collect();
            faces.sort_unstable();
            faces
        })
        .collect();
    let mut owner: HashMap<usize, usize> = HashMap::new();
    let mut pairs = Vec::new();
    let mut killed = vec![false; simplices.len()];
    for j in 0..columns.len() {
        while let Some(&low) = columns[j].last() {
            match owner.get(&low) {
                Some(&k) => {
                    let merged = symmetric_difference(&columns[j], &columns[k]);
                    columns[j] = merged;
                }
                None => {
                    owner.insert(low, j);
                    killed[low] = true;
                    if simplices[j].1.len() == 3 {
                        pairs.push((simplices[low].0, simplices[j].0));
                    }
                    break;
                }
            }
        }
    }
    for (i, s) in simplices.iter().enumerate() {
        if s.1.len() == 2 && columns[i].is_empty() && !killed[i] {
            pairs.push((s.0, f64::INFINITY));
        }
    }
    pairs.retain(|p| p.1 > p.0);
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pairs
}

/// Sum of two sorted GF(2) columns.
fn symmetric_difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

pub fn schema_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

/// Validates `instance` against `schemas/<name>.schema.json`.
pub fn check_schema(name: &str, instance: &Value) -> Result<(), String> {
    let path = schema_dir().join(format!("{name}.schema.json"));
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let schema: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let validator = jsonschema::validator_for(&schema).map_err(|e| format!("{name}: bad schema: {e}"))?;
    let errors: Vec<String> = validator.iter_errors(instance).map(|e| e.to_string()).collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(format!("{name}: {}", errors.join("; ")))
    }
}

pub async fn call(app: &Router, method: Method, uri: &str, body: Option<&Value>) -> (StatusCode, Value) {
    let request = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(match body {
            Some(v) => Body::from(serde_json::to_vec(v).unwrap()),
            None => Body::empty(),
        })
        .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, value)
}

/// Calls the API and checks both the status and the payload schema.
pub async fn expect(
    app: &Router,
    method: Method,
    uri: &str,
    body: Option<&Value>,
    status: StatusCode,
    schema: &str,
) -> Result<Value, String> {
    let (got, value) = call(app, method.clone(), uri, body).await;
    if got != status {
        return Err(format!("{method} {uri}: status {got}, expected {status}: {value}"));
    }
    check_schema(schema, &value).map_err(|e| format!("{method} {uri}: {e}"))?;
    Ok(value)
}
