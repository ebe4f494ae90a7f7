#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = itp_cli::config::parse_measure_list(s);
        let _ = itp_cli::config::parse_point(s);
    }
});
