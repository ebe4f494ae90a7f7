#![no_main]
use itp_core::fnalg::ScalarFn;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(f) = serde_json::from_str::<ScalarFn>(s) {
            // accepted input must survive a round trip
            let back: ScalarFn = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
            assert!(back.approx_eq(&f, 1e-12));
        }
    }
});
