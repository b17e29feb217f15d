#![no_main]

use libfuzzer_sys::fuzz_target;
use soq_core::mapper::{graph_from_json, graph_to_dot, graph_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(g) = graph_from_json(text) {
        let _ = graph_to_dot(&g);
        let _ = g.n_components();
        assert_eq!(graph_from_json(&graph_to_json(&g)).expect("round trip"), g);
    }
});
