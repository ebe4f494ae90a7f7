#![no_main]
use itp_core::tensor::tensor_from_json;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = tensor_from_json(s);
    }
});
