#![no_main]

use ffp_core::problem::parse_problem;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(spec) = parse_problem(text) else {
        return;
    };
    let rendered = spec.render();
    let again = parse_problem(&rendered).expect("rendered spec must parse");
    assert_eq!(again, spec);
    assert_eq!(again.render(), rendered);
});
