#![no_main]

use dsocs::cli::RunConfig;
use dsocs::io::Config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(cfg) = Config::parse(text) else { return };
    // Rendering and reparsing must give the same entries.
    let rendered: String = cfg.keys().map(|k| format!("{k} = {}\n", cfg.get(k).unwrap())).collect();
    let again = Config::parse(&rendered).expect("rendered config reparses");
    assert_eq!(again, cfg);
    let _ = RunConfig::from_config(&cfg);
});
