#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(rows) = ffp_core::problem::parse_point_set(text) {
            assert!(!rows.is_empty());
            assert!(rows.iter().flatten().all(|x| x.is_finite()));
        }
        let _ = ffp_core::problem::parse_vector(text);
        let _ = ffp_core::problem::parse_matrix(text);
    }
});
