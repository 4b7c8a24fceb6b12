#![no_main]

use libfuzzer_sys::fuzz_target;
use loewner_lab::mollify::parse_table;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(rows) = parse_table(text) {
            assert!(rows.iter().all(|(t, f)| t.is_finite() && f.is_finite()));
        }
    }
});
