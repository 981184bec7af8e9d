//! Built-in demo problems, addressable by name from the command line.

use crate::problem::{Affine, Mapping, ProblemSpec};
use crate::Point;

/// Terms of the harmonic partial-sum demo.
pub const HARMONIC_TERMS: usize = 10_000;

pub const DEMO_NAMES: &[&str] = &[
    "harmonic",
    "halving",
    "affine-shift",
    "affine-2d",
    "two-branch",
    "two-branch-offset",
    "expansion",
    "translation",
    "slow-contraction",
];

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Demo {
    Problem(ProblemSpec),
    /// Partial sums `u_n = 1 + 1/2 + ... + 1/n` on the real line.
    Harmonic { terms: usize },
}

fn scalar_map(scale: f64, shift: f64) -> Affine {
    Affine {
        matrix: vec![vec![scale]],
        offset: vec![shift],
    }
}

pub fn demo(name: &str) -> Option<Demo> {
    let single = |k, scale, shift, x0| {
        Demo::Problem(ProblemSpec::scalar(k, Mapping::Single(scalar_map(scale, shift)), x0))
    };
    let multi = |k, branches: &[(f64, f64)], x0| {
        Demo::Problem(ProblemSpec::scalar(
            k,
            Mapping::Multi(branches.iter().map(|&(a, b)| scalar_map(a, b)).collect()),
            x0,
        ))
    };
    Some(match name {
        "harmonic" => Demo::Harmonic {
            terms: HARMONIC_TERMS,
        },
        "halving" => single(0.5, 0.5, 0.0, 1.0),
        "affine-shift" => single(0.5, 0.5, 1.0, 0.0),
        "affine-2d" => {
            let mut spec = ProblemSpec::scalar(
                0.5,
                Mapping::Single(Affine {
                    matrix: vec![vec![0.5, 0.0], vec![0.0, 0.25]],
                    offset: vec![1.0, 1.0],
                }),
                0.0,
            );
            spec.dim = 2;
            spec.solver.x0 = vec![0.0, 0.0];
            Demo::Problem(spec)
        }
        "two-branch" => multi(0.5, &[(1.0 / 3.0, 0.0), (0.5, 0.0)], 1.0),
        "two-branch-offset" => multi(0.5, &[(0.5, 0.0), (0.5, 0.5)], 0.0),
        "expansion" => single(0.5, 2.0, 0.0, 1.0),
        "translation" => single(0.9, 1.0, 1.0, 0.0),
        // a genuine contraction with too small an iteration budget
        "slow-contraction" => {
            let mut d = single(0.9, 0.9, 0.0, 1.0);
            if let Demo::Problem(spec) = &mut d {
                spec.solver.max_iter = 50;
            }
            d
        }
        _ => return None,
    })
}

pub fn harmonic_sequence(terms: usize) -> Vec<Point> {
    let mut sum = 0.0;
    (1..=terms)
        .map(|k| {
            sum += 1.0 / k as f64;
            Point::from(sum)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_resolves() {
        for name in DEMO_NAMES {
            match demo(name).unwrap() {
                Demo::Problem(spec) => spec.validate().unwrap(),
                Demo::Harmonic { terms } => assert_eq!(terms, HARMONIC_TERMS),
            }
        }
        assert!(demo("nope").is_none());
    }

    #[test]
    fn harmonic_terms() {
        let seq = harmonic_sequence(4);
        assert_eq!(seq[0], Point::from(1.0));
        assert!((seq[3][0] - 25.0 / 12.0).abs() < 1e-15);
    }
}
