//! Replays the checked-in fuzz seeds through the invariants the fuzz targets
//! assert, so they run on stable with every `cargo test`.

use std::path::PathBuf;

use soq_core::csv_io::{parse_point_cloud_csv, write_point_cloud_csv};
use soq_core::mapper::{graph_from_json, graph_to_dot, graph_to_json};
use soq_core::persistence::{diagram_from_json, diagram_to_json};
use soq_core::representative::RepresentativeSet;

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, String)> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| {
            let path = entry.unwrap().path();
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read_to_string(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn point_cloud_csv_seeds() {
    let mut parsed = 0;
    for (name, text) in seeds("point_cloud_csv") {
        if let Ok(cloud) = parse_point_cloud_csv(&text) {
            assert_eq!(parse_point_cloud_csv(&write_point_cloud_csv(&cloud)).unwrap(), cloud, "{name}");
            parsed += 1;
        }
    }
    assert!(parsed >= 3);
}

#[test]
fn diagram_json_seeds() {
    for (name, text) in seeds("diagram_json") {
        let d = diagram_from_json(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(diagram_from_json(&diagram_to_json(&d)).unwrap(), d, "{name}");
    }
}

#[test]
fn graph_json_seeds() {
    for (name, text) in seeds("graph_json") {
        let g = graph_from_json(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let _ = graph_to_dot(&g);
        assert_eq!(graph_from_json(&graph_to_json(&g)).unwrap(), g, "{name}");
    }
}

#[test]
fn reps_json_seeds() {
    for (name, text) in seeds("reps_json") {
        let reps = RepresentativeSet::from_json(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(RepresentativeSet::from_json(&reps.to_json()).unwrap(), reps, "{name}");
    }
}
