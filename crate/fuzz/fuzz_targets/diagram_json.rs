#![no_main]

use libfuzzer_sys::fuzz_target;
use soq_core::persistence::{diagram_from_json, diagram_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(d) = diagram_from_json(text) {
        assert_eq!(diagram_from_json(&diagram_to_json(&d)).expect("round trip"), d);
    }
});
