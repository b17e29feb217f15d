#![no_main]

use libfuzzer_sys::fuzz_target;
use soq_core::csv_io::{parse_point_cloud_csv, write_point_cloud_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cloud) = parse_point_cloud_csv(text) {
        let again = parse_point_cloud_csv(&write_point_cloud_csv(&cloud)).expect("written CSV parses");
        assert_eq!(again, cloud);
    }
});
