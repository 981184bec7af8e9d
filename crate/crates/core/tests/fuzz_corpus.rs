//! Replays the checked-in fuzz corpus through the same assertions the fuzz
//! targets make, so regressions surface without a fuzzing toolchain.

use std::fs;
use std::path::PathBuf;

use ffp_core::problem::{parse_matrix, parse_point_set, parse_problem, parse_vector};

fn corpus(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut files: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    assert!(!files.is_empty(), "empty corpus for {target}");
    files
        .into_iter()
        .map(|p| {
            let text = fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect()
}

#[test]
fn parse_problem_seeds() {
    let mut parsed = 0;
    for (_, text) in corpus("parse_problem") {
        if let Ok(spec) = parse_problem(&text) {
            let _ = spec.build(0);
            parsed += 1;
        }
    }
    assert!(parsed > 0);
}

#[test]
fn problem_roundtrip_seeds() {
    for (path, text) in corpus("problem_roundtrip") {
        let spec = parse_problem(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let rendered = spec.render();
        let again = parse_problem(&rendered).unwrap();
        assert_eq!(again, spec, "{}", path.display());
        assert_eq!(again.render(), rendered);
    }
}

#[test]
fn parse_point_set_seeds() {
    let mut accepted = 0;
    for (_, text) in corpus("parse_point_set") {
        if let Ok(rows) = parse_point_set(&text) {
            assert!(!rows.is_empty());
            assert!(rows.iter().flatten().all(|x| x.is_finite()));
            accepted += 1;
        }
        let _ = parse_vector(&text);
        let _ = parse_matrix(&text);
    }
    assert_eq!(accepted, 2);
}
