#![no_main]

use libfuzzer_sys::fuzz_target;
use loewner_lab::expr::parse_nodes;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(nodes) = parse_nodes(text) {
            assert!(!nodes.is_empty() && nodes.iter().all(|t| t.is_finite()));
        }
    }
});
