#![no_main]
use itp_core::measures::{Measure1D, ProductMeasure};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = serde_json::from_str::<Measure1D>(s);
        let _ = serde_json::from_str::<ProductMeasure>(s);
    }
});
