#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(values) = wrfcm::config::parse_range(text) {
        assert!(!values.is_empty() && values.len() <= 10_001);
        assert!(values.windows(2).all(|w| w[0] < w[1] || w[0] == w[1]));
        assert!(values.iter().all(|v| v.is_finite()));
    }
});
