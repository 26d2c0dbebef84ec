#![no_main]

use libfuzzer_sys::fuzz_target;
use wavelab::harness::{emit_csv, parse_store, unique_records};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(entries) = parse_store(text) {
        assert!(entries.iter().all(|e| e.verify()));
        let _ = emit_csv(&unique_records(&entries));
    }
});
