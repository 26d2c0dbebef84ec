#![no_main]

use libfuzzer_sys::fuzz_target;
use wavelab::sharpness::record::exponent;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Some(v) = exponent::parse(text) {
        assert_eq!(
            exponent::parse(&exponent::format(v)).map(f64::to_bits),
            Some(v.to_bits())
        );
    }
});
