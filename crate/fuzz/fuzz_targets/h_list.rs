#![no_main]

use dsocs::io::parse_h_list;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(list) = parse_h_list(text) {
        assert!(!list.is_empty());
        assert!(list.iter().all(|h| *h > 0.0 && h.is_finite()));
    }
});
