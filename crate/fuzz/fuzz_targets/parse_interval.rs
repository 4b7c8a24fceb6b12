#![no_main]

use libfuzzer_sys::fuzz_target;
use loewner_lab::expr::Interval;

fuzz_target!(|data: &[u8]| {
    let Some((&flag, rest)) = data.split_first() else {
        return;
    };
    if let Ok(text) = std::str::from_utf8(rest) {
        if let Ok(i) = Interval::parse(text, flag & 1 == 1) {
            assert!(i.lo < i.hi);
        }
    }
});
