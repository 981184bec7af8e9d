#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(spec) = ffp_core::problem::parse_problem(text) {
            // anything that parses must also build or fail cleanly
            let _ = spec.build(0);
        }
    }
});
