#![no_main]

use libfuzzer_sys::fuzz_target;
use soq_core::representative::RepresentativeSet;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(reps) = RepresentativeSet::from_json(text) {
        assert_eq!(RepresentativeSet::from_json(&reps.to_json()).expect("round trip"), reps);
    }
});
