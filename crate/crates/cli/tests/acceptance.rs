//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

// `ensure!(a <= b)` must also fail on NaN, which `!(a <= b)` does.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use ffp_core::contraction::{verify_metric_condition, MultiMap, PiProbe, SamplingProtocol, SingleMap, ZetaFn};
use ffp_core::demo::{demo, harmonic_sequence, Demo, DEMO_NAMES, HARMONIC_TERMS};
use ffp_core::fuzzy_metric::{FuzzyMetric, PointSpace};
use ffp_core::hausdorff::{hausdorff_eval, point_to_set, FiniteCompactSet};
use ffp_core::problem::parse_problem;
use ffp_core::solver::{inclusion_residual, solve_classic, solve_multi, solve_single, step_inequality, SolverConfig};
use ffp_core::tnorm::{HTypeProbe, TNorm};
use ffp_core::Point;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn line() -> FuzzyMetric {
    FuzzyMetric::standard(PointSpace::euclidean(1)).unwrap()
}

fn criterion_1() -> Outcome {
    for t in [TNorm::Lukasiewicz, TNorm::Product, TNorm::Minimum] {
        let report = t.check_axioms(100).map_err(err)?;
        ensure!(report.passed(), "{} failed:\n{report}", t.name());
        ensure!(report.checks.len() == 6, "expected 6 checks, got {}", report.checks.len());
    }
    let avg = TNorm::custom("average", |a, b| (a + b) / 2.0);
    let report = avg.check_axioms(100).map_err(err)?;
    let check = report.first_failure().ok_or("averaging operator accepted")?;
    let (name, cx) = (check.name, check.counterexample.clone().ok_or("failed check without witness")?);
    // independent re-check of the witness for the identity law
    if name == "identity" {
        let a = cx.values[0];
        ensure!((a + 1.0) / 2.0 != a, "identity witness a={a} does not violate");
    }
    Ok(format!("3 built-ins pass on 101x101 grid; average rejected by {name}: {}", cx.detail))
}

fn criterion_2() -> Outcome {
    let probe = HTypeProbe::default();
    let m = TNorm::Minimum.probe_h_type(&probe);
    ensure!(m.holds && m.witness.is_none(), "minimum rejected: {:?}", m.witness);
    let mut details = Vec::new();
    for t in [TNorm::Lukasiewicz, TNorm::Product] {
        let v = t.probe_h_type(&probe);
        let w = v.witness.ok_or(format!("{} accepted", t.name()))?;
        ensure!(!v.holds, "{} verdict inconsistent", t.name());
        // recompute the power by plain iteration
        let mut acc = 1.0;
        for _ in 0..w.n {
            acc = match t {
                TNorm::Lukasiewicz => (acc + w.rho - 1.0_f64).max(0.0),
                _ => acc * w.rho,
            };
        }
        ensure!(w.rho < 1.0 && acc <= 1.0 - w.eps, "{} witness does not reproduce: {acc}", t.name());
        details.push(format!("{} at (eps={}, rho={}, n={})", t.name(), w.eps, w.rho, w.n));
    }
    Ok(format!("minimum accepted; rejected {}", details.join(", ")))
}

fn criterion_3() -> Outcome {
    let fm = FuzzyMetric::standard(PointSpace::euclidean(2)).map_err(err)?;
    let grid = [0.01, 0.1, 1.0, 10.0, 100.0];
    let report = fm.check_axioms(10_000, &grid, 31).map_err(err)?;
    ensure!(report.passed(), "violation:\n{report}");
    let evaluations: usize = report.checks.iter().map(|c| c.evaluations).sum();
    Ok(format!("10^4 triples x 5 rho, {evaluations} evaluations, zero violations"))
}

fn random_set(rng: &mut ChaCha8Rng, dim: usize) -> FiniteCompactSet {
    let n = rng.gen_range(1..=5);
    let points = (0..n)
        .map(|_| Point::new((0..dim).map(|_| rng.gen_range(-10.0..10.0)).collect()))
        .collect();
    FiniteCompactSet::new(points).unwrap()
}

/// Classical Hausdorff distance by brute force.
fn hausdorff_distance(a: &FiniteCompactSet, b: &FiniteCompactSet) -> f64 {
    let d = |u: &Point, v: &Point| u.iter().zip(v.iter()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let directed = |x: &FiniteCompactSet, y: &FiniteCompactSet| {
        x.points()
            .iter()
            .map(|u| y.points().iter().map(|v| d(u, v)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

fn criterion_4() -> Outcome {
    let fm = FuzzyMetric::standard(PointSpace::euclidean(2)).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let rhos = [0.01, 0.1, 1.0, 10.0, 100.0];

    for _ in 0..100 {
        let a = Point::from([rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)]);
        let b = Point::from([rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)]);
        let rho = rhos[rng.gen_range(0..rhos.len())];
        let sa = FiniteCompactSet::singleton(a.clone()).map_err(err)?;
        let sb = FiniteCompactSet::singleton(b.clone()).map_err(err)?;
        let got = hausdorff_eval(&fm, &sa, &sb, rho).map_err(err)?;
        ensure!(got == fm.eval(&a, &b, rho).map_err(err)?, "(a) singleton mismatch at {a} {b}");
    }

    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let a = random_set(&mut rng, 2);
        let b = random_set(&mut rng, 2);
        let rho = rhos[rng.gen_range(0..rhos.len())];
        let expected = rho / (rho + hausdorff_distance(&a, &b));
        let got = hausdorff_eval(&fm, &a, &b, rho).map_err(err)?;
        worst = worst.max((got - expected).abs());
        ensure!((got - expected).abs() <= 1e-12, "(b) oracle mismatch {got} vs {expected}");
    }

    for _ in 0..1000 {
        let (a, b, c) = (random_set(&mut rng, 2), random_set(&mut rng, 2), random_set(&mut rng, 2));
        let rho = rhos[rng.gen_range(0..rhos.len())];
        let s = rhos[rng.gen_range(0..rhos.len())];
        let lhs = hausdorff_eval(&fm, &a, &c, rho + s).map_err(err)?;
        let rhs = hausdorff_eval(&fm, &a, &b, rho).map_err(err)? * hausdorff_eval(&fm, &b, &c, s).map_err(err)?;
        ensure!(lhs >= rhs - 1e-12, "(c) triangle fails: {lhs} < {rhs}");
    }

    for _ in 0..1000 {
        let (a, b) = (random_set(&mut rng, 2), random_set(&mut rng, 2));
        let rho = rhos[rng.gen_range(0..rhos.len())];
        for u in a.points() {
            let hit = point_to_set(&fm, u, &b, rho).map_err(err)?;
            ensure!(hit.value == fm.eval(u, hit.witness, rho).map_err(err)?, "(d) witness value differs");
            for v in b.points() {
                ensure!(fm.eval(u, v, rho).map_err(err)? <= hit.value, "(d) witness is not a maximiser");
            }
        }
    }
    Ok(format!("(a) exact, (b) max |err| {worst:.1e}, (c) holds, (d) attained exactly"))
}

fn criterion_5() -> Outcome {
    let probe = PiProbe::default();
    for i in 1..=11 {
        let k = i as f64 / 10.0;
        let v = ZetaFn::linear(k).map_err(err)?.probe_pi_membership(&probe).map_err(err)?;
        ensure!(v.member == (k < 1.0), "k={k}: member={}", v.member);
    }
    let square = ZetaFn::custom("square", |r| r * r);
    let v = square.probe_pi_membership(&probe).map_err(err)?;
    let w = v.witness.ok_or("rho^2 accepted")?;
    ensure!(!v.member && w.rho > 1.0, "witness rho={} not above 1", w.rho);
    Ok(format!("linear k<1 accepted, k>=1 rejected; rho^2 witness rho={}", w.rho))
}

fn criterion_6() -> Outcome {
    let fm = line();
    let cert = solve_single(&fm, &SingleMap::scalar(0.5, 0.0).map_err(err)?, &SolverConfig::new(1.0)).map_err(err)?;
    let z = cert.fixed_point.clone().ok_or("x/2 did not converge")?;
    ensure!(z[0].abs() <= 1e-9 && cert.trace.steps() <= 60, "z={z}, steps={}", cert.trace.steps());
    let halving_steps = cert.trace.steps();

    let fm2 = FuzzyMetric::standard(PointSpace::euclidean(2)).map_err(err)?;
    let f = SingleMap::affine(2, vec![0.5, 0.0, 0.0, 0.25], vec![1.0, 1.0]).map_err(err)?;
    let zeta = ZetaFn::linear(0.5).map_err(err)?;
    let target = [2.0, 4.0 / 3.0];
    let mut ends = Vec::new();
    for x0 in [[0.0, 0.0], [-5.0, 7.0], [9.0, -3.0]] {
        let cert = solve_single(&fm2, &f, &SolverConfig::new(x0)).map_err(err)?;
        let z = cert.fixed_point.clone().ok_or(format!("no convergence from {x0:?}"))?;
        ensure!(z.iter().zip(target).all(|(a, b)| (a - b).abs() <= 1e-8), "z={z} from {x0:?}");
        let step = step_inequality(&fm2, &cert.trace, &zeta, 1.0).map_err(err)?;
        ensure!(step.holds() && step.worst_margin >= -1e-12, "step inequality: {:?}", step.violation);
        ends.push(z);
    }
    let spread = ends
        .iter()
        .flat_map(|a| ends.iter().map(move |b| a.euclidean(b)))
        .fold(0.0, f64::max);
    ensure!(spread <= 1e-8, "starts disagree by {spread}");
    Ok(format!("x/2 in {halving_steps} steps; 2-D endpoints within {spread:.1e}"))
}

fn criterion_7() -> Outcome {
    let fm = line();
    let zeta = ZetaFn::linear(0.5).map_err(err)?;
    let branches = |pairs: &[(f64, f64)]| {
        MultiMap::new(pairs.iter().map(|&(a, b)| SingleMap::scalar(a, b).unwrap()).collect())
    };
    let s = branches(&[(1.0 / 3.0, 0.0), (0.5, 0.0)]).map_err(err)?;
    let cert = solve_multi(&fm, &s, &zeta, &SolverConfig::new(1.0)).map_err(err)?;
    let z = cert.fixed_point.ok_or("two-branch did not converge")?;
    let r = inclusion_residual(&fm, &z, &s, 1.0).map_err(err)?;
    ensure!(r <= 1e-9, "inclusion residual {r}");

    let s = branches(&[(0.5, 0.0), (0.5, 0.5)]).map_err(err)?;
    let cert = solve_multi(&fm, &s, &zeta, &SolverConfig::new(0.0)).map_err(err)?;
    ensure!(cert.converged() && cert.trace.steps() == 0, "not immediate: {} steps", cert.trace.steps());
    ensure!(cert.final_residual == 0.0, "residual {}", cert.final_residual);
    Ok(format!("two-branch residual {r:.1e}; offset pair certified at x0 with residual 0"))
}

fn criterion_8() -> Outcome {
    let space = PointSpace::euclidean(1);
    let f = SingleMap::scalar(0.5, 1.0).map_err(err)?;
    let zeta = ZetaFn::linear(0.5).map_err(err)?;
    let cfg = SolverConfig::new(0.0);
    let protocol = SamplingProtocol::default();
    let classic = solve_classic(&space, &f, &zeta, &cfg, &protocol).map_err(err)?;
    let z = classic.fixed_point.clone().ok_or("classic run did not converge")?;
    ensure!((z[0] - 2.0).abs() <= 1e-9, "z={z}");
    let fuzzy = solve_single(&line(), &f, &cfg).map_err(err)?;
    let bits = |t: &[Point]| t.iter().flat_map(|p| p.iter().map(|x| x.to_bits()).collect::<Vec<_>>()).collect::<Vec<_>>();
    ensure!(bits(&classic.trace.iterates) == bits(&fuzzy.trace.iterates), "iterates differ");

    let translation = SingleMap::scalar(1.0, 1.0).map_err(err)?;
    let report = verify_metric_condition(&space, &translation, &zeta, &protocol).map_err(err)?;
    let cx = report.counterexample.ok_or("x+1 accepted")?;
    // rho * d(fu, fv) <= zeta(rho) * d(u, v) must fail at the witness
    let d = (cx.u[0] - cx.v[0]).abs();
    ensure!(cx.rho * d > 0.5 * cx.rho * d, "witness does not violate");
    Ok(format!("z={}, {} iterates bit-identical; x+1 rejected at rho={}", z[0], classic.trace.len(), cx.rho))
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let seq = harmonic_sequence(HARMONIC_TERMS);
    let v = line().classify_sequence(&seq, 0.05, 1.0, 5).map_err(err)?;
    let elapsed = start.elapsed();
    ensure!(elapsed.as_secs_f64() <= 30.0, "took {elapsed:?}");

    // partial sums and the standard fuzzy metric recomputed directly
    let mut sums = Vec::with_capacity(HARMONIC_TERMS);
    let mut acc = 0.0;
    for k in 1..=HARMONIC_TERMS {
        acc += 1.0 / k as f64;
        sums.push(acc);
    }
    let theta = |i: usize, j: usize| 1.0 / (1.0 + (sums[j] - sums[i]).abs());

    ensure!(v.per_gap.len() == 5 && v.per_gap.iter().all(|c| c.certified), "a gap is not certified");
    ensure!(v.g_cauchy.certified, "g-cauchy not certified");
    for (gap, check) in v.per_gap.iter().enumerate() {
        let p = gap + 1;
        ensure!(check.start <= HARMONIC_TERMS / 2, "p={p} certified too late");
        ensure!((check.start..HARMONIC_TERMS - p).all(|n| theta(n, n + p) > 0.95), "p={p} tail has a violation");
    }
    ensure!(!v.cauchy.certified, "cauchy certified");
    let w = v.cauchy.witness.ok_or("no cauchy witness")?;
    ensure!(w.first >= HARMONIC_TERMS / 2, "witness {} outside the tail", w.first);
    ensure!(theta(w.first, w.second) <= 0.95, "witness ({}, {}) does not violate", w.first, w.second);
    Ok(format!(
        "g-cauchy from n={}, cauchy witness (n={}, m={}, theta={:.4}), {:.2?}",
        v.g_cauchy.start, w.first, w.second, w.theta, elapsed
    ))
}

fn ffp(args: &[&str], out: &Path) -> std::io::Result<i32> {
    let status = Command::new(env!("CARGO_BIN_EXE_ffp"))
        .args(args)
        .arg("--output")
        .arg(out)
        .env_remove("FFP_SEED")
        .output()?
        .status;
    Ok(status.code().unwrap_or(-1))
}

fn criterion_10() -> Outcome {
    let mut round_trips = 0;
    for name in DEMO_NAMES {
        if let Some(Demo::Problem(spec)) = demo(name) {
            let back = parse_problem(&spec.render()).map_err(err)?;
            ensure!(back == spec, "{name} does not round-trip");
            round_trips += 1;
        }
    }

    let dir = tempfile::tempdir().map_err(err)?;
    for name in ["affine-2d", "two-branch", "harmonic"] {
        let a = dir.path().join(format!("{name}-a"));
        let b = dir.path().join(format!("{name}-b"));
        for out in [&a, &b] {
            ffp(&["trace", "--demo", name, "--seed", "7"], out).map_err(err)?;
        }
        for file in ["report.txt", "certificate.kv", "trace.csv"] {
            let (fa, fb) = (std::fs::read(a.join(file)), std::fs::read(b.join(file)));
            match (fa, fb) {
                (Ok(x), Ok(y)) => ensure!(x == y, "{name}/{file} differs between seeded runs"),
                (Err(_), Err(_)) => {}
                _ => return Err(format!("{name}/{file} written by only one run")),
            }
        }
    }

    let expected = [("halving", 0), ("expansion", 2), ("slow-contraction", 3)];
    for (name, code) in expected {
        let got = ffp(&["solve", "--demo", name], &dir.path().join(name)).map_err(err)?;
        ensure!(got == code, "{name}: exit {got}, expected {code}");
    }
    Ok(format!("{round_trips} demo specs round-trip; seeded outputs identical; exits 0/2/3"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("t-norm axioms", criterion_1),
        ("H-type probe", criterion_2),
        ("fuzzy metric axioms", criterion_3),
        ("Hausdorff fuzzy metric", criterion_4),
        ("class Pi probe", criterion_5),
        ("single-valued solver", criterion_6),
        ("multi-valued solver", criterion_7),
        ("ordinary metric bridge", criterion_8),
        ("sequence classification", criterion_9),
        ("command line", criterion_10),
    ];
    let mut failed = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS {title} [{secs:.2}s]: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL {title} [{secs:.2}s]: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
