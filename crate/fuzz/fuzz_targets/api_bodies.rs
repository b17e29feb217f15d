#![no_main]

use libfuzzer_sys::fuzz_target;
use soq::service::{FinalRunBody, LabelBody, RecordsBody};
use soq_core::pipeline::{PipelineConfig, SoQState};

// Request bodies of the HTTP API, fed through the same state calls the
// handlers make.
fuzz_target!(|data: &[u8]| {
    if let Ok(body) = serde_json::from_slice::<RecordsBody>(data) {
        let mut state = SoQState::new(PipelineConfig::default()).expect("default config");
        if state.ingest_stage(1, &body.records).is_ok() {
            let params = state.config().mapper;
            let _ = state.analyze_stage(1, &params);
            let _ = state.run_final_stage(&body.records, 3);
        }
    }
    let _ = serde_json::from_slice::<FinalRunBody>(data);
    let _ = serde_json::from_slice::<LabelBody>(data);
});
