#![no_main]

use dsocs::io::read_table;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(table) = read_table(text) {
        assert!(table.rows.iter().all(|r| r.len() == table.header.len()));
        let _ = table.points(table.header.len().saturating_sub(2));
    }
});
