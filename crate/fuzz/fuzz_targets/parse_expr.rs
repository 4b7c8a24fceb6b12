#![no_main]

use libfuzzer_sys::fuzz_target;
use loewner_lab::expr::{parse_expr, FunctionSpec};
use loewner_lab::scalar::PrecisionCfg;

// Parsing never panics; accepted input re-parses from its printed form to the
// same tree and evaluates without panicking.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(ast) = parse_expr(text) else {
        return;
    };
    let printed = ast.to_string();
    assert_eq!(parse_expr(&printed).as_ref(), Ok(&ast), "{printed}");
    if let Ok(f) = FunctionSpec::parse(text) {
        let _ = f.eval(0.5, PrecisionCfg::Machine);
    }
});
