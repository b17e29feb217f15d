#![no_main]

use std::path::Path;

use libfuzzer_sys::fuzz_target;
use soq::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = RunConfig::from_toml(text, Path::new("/nonexistent")) {
        // accepted configs are validated, so the generator settings must be too
        cfg.generator_config().validate().expect("validated config");
        cfg.pipeline.validate().expect("validated config");
    }
});
