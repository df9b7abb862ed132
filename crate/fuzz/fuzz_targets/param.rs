#![no_main]

use dsocs::io::{parse_param_override, Config};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((key, value)) = parse_param_override(text) {
        let mut cfg = Config::default();
        cfg.set(&key, &value).expect("accepted keys are valid config keys");
        assert_eq!(cfg.get(&key), Some(value.as_str()));
    }
});
