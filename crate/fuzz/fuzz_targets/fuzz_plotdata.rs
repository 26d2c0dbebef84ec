#![no_main]

use libfuzzer_sys::fuzz_target;
use wavelab::harness::parse_plotdata;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(series) = parse_plotdata(text) {
        for s in &series {
            let _ = s.stored_slope();
            let _ = s.refit();
        }
    }
});
