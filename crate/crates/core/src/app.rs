//! Command driver behind the `ffp` binary: `verify`, `solve` and `trace`.
//!
//! Every run produces a human-readable report and, for `solve`/`trace`, a
//! machine-readable `certificate.kv` and a `trace.csv`. Exit statuses are
//! limited to [`ExitStatus`].

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::contraction::{verify_multi_contraction, verify_single_contraction, PiProbe, PiVerdict, VerificationReport};
use crate::demo::{harmonic_sequence, Demo};
use crate::fuzzy_metric::{FuzzyMetric, PointSpace, SequenceVerdict};
use crate::hausdorff::hausdorff_eval;
use crate::problem::{BuiltMapping, Problem, ProblemSpec};
use crate::solver::{solve_multi, solve_single, step_inequality, Certificate, Status, DIAGNOSTIC_EPS, DIAGNOSTIC_P_MAX};
use crate::tnorm::{HTypeProbe, TNorm};
use crate::{Error, Point, Result};

/// Grid resolution of the t-norm axiom check run by `verify`.
pub const TNORM_GRID: usize = 100;
/// Sequence diagnostic defaults: ε, ρ and largest gap.
pub const SEQUENCE_EPS: f64 = 0.05;
pub const SEQUENCE_RHO: f64 = 1.0;
pub const SEQUENCE_P_MAX: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Verify,
    Solve,
    Trace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Io = 1,
    /// A counterexample, failed hypothesis, or invalid input.
    Failed = 2,
    NotConverged = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub skip_verify: bool,
    /// `--seed`; overrides the file.
    pub seed: Option<u64>,
    /// `FFP_SEED`; used only when neither flag nor file gives a seed.
    pub env_seed: Option<u64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    /// Output directory; nothing is written when `None`.
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: ExitStatus,
    pub report: String,
    pub certificate: Option<Certificate>,
    pub sequence: Option<SequenceVerdict>,
    /// Files written, in order.
    pub written: Vec<PathBuf>,
}

impl Outcome {
    fn failed(message: String) -> Self {
        Outcome {
            status: ExitStatus::Failed,
            report: message,
            certificate: None,
            sequence: None,
            written: Vec::new(),
        }
    }
}

/// Formats a real with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_point(p: &Point) -> String {
    p.iter().map(|&c| fmt_real(c)).collect::<Vec<_>>().join(",")
}

/// Runs a subcommand. Invalid input and domain errors map to exit status 2,
/// I/O failures to 1.
pub fn run(command: Command, input: &Demo, opts: &RunOptions) -> Outcome {
    let artifacts = match input {
        Demo::Harmonic { terms } => run_sequence(command, *terms),
        Demo::Problem(spec) => match prepare(spec, opts) {
            Ok(problem) => run_problem(command, &problem, opts),
            Err(e) => Err(e),
        },
    };
    let mut outcome = match artifacts {
        Ok(o) => o,
        Err(e) => return Outcome::failed(format!("error: {e}\n")),
    };
    if let Some(dir) = &opts.output_dir {
        if let Err(e) = write_outputs(dir, &mut outcome) {
            outcome.outcome.status = ExitStatus::Io;
            let _ = writeln!(outcome.outcome.report, "error: cannot write outputs to {}: {e}", dir.display());
        }
    }
    outcome.outcome
}

struct Artifacts {
    outcome: Outcome,
    certificate_kv: Option<String>,
    csv: Option<String>,
}

fn write_outputs(dir: &Path, artifacts: &mut Artifacts) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut files = vec![("report.txt", Some(artifacts.outcome.report.clone()))];
    files.push(("certificate.kv", artifacts.certificate_kv.take()));
    files.push(("trace.csv", artifacts.csv.take()));
    for (name, body) in files {
        if let Some(body) = body {
            let path = dir.join(name);
            fs::write(&path, body)?;
            artifacts.outcome.written.push(path);
        }
    }
    Ok(())
}

fn prepare(spec: &ProblemSpec, opts: &RunOptions) -> Result<Problem> {
    let mut spec = spec.clone();
    if let Some(seed) = opts.seed {
        spec.sample.seed = Some(seed);
    }
    if let Some(tol) = opts.tol {
        spec.solver.tol = tol;
    }
    if let Some(max_iter) = opts.max_iter {
        spec.solver.max_iter = max_iter;
    }
    spec.build(opts.env_seed.unwrap_or(0))
}

fn run_sequence(command: Command, terms: usize) -> Result<Artifacts> {
    let fm = FuzzyMetric::standard(PointSpace::euclidean(1))?;
    let seq = harmonic_sequence(terms);
    let verdict = fm.classify_sequence(&seq, SEQUENCE_EPS, SEQUENCE_RHO, SEQUENCE_P_MAX)?;
    let mut report = format!(
        "harmonic partial sums, {terms} terms, standard fuzzy metric on R\n\
         eps={SEQUENCE_EPS} rho={SEQUENCE_RHO} p_max={SEQUENCE_P_MAX} (certified tails must start at or before n={})\n",
        verdict.tail_bound
    );
    write_sequence_verdict(&mut report, "sequence", &verdict);
    let csv = (command == Command::Trace)
        .then(|| orbit_csv(&fm, &seq, None, SEQUENCE_RHO, Some(&verdict), true));
    Ok(Artifacts {
        outcome: Outcome {
            status: ExitStatus::Success,
            report,
            certificate: None,
            sequence: Some(verdict),
            written: Vec::new(),
        },
        certificate_kv: None,
        csv,
    })
}

fn write_sequence_verdict(out: &mut String, label: &str, v: &SequenceVerdict) {
    let _ = writeln!(out, "{label}: classification {}", v.classification.label());
    let describe = |c: &crate::fuzzy_metric::TailCheck| match (&c.certified, &c.witness) {
        (true, _) => format!("certified from n={}", c.start),
        (false, Some(w)) if w.second == usize::MAX => {
            format!("fails, witness n={} theta={}", w.first, fmt_real(w.theta))
        }
        (false, Some(w)) => format!("fails, witness (n={}, m={}) theta={}", w.first, w.second, fmt_real(w.theta)),
        (false, None) => "fails".to_string(),
    };
    let _ = writeln!(out, "  cauchy:   {}", describe(&v.cauchy));
    let _ = writeln!(out, "  g-cauchy: {}", describe(&v.g_cauchy));
    for (i, c) in v.per_gap.iter().enumerate() {
        let _ = writeln!(out, "    p={}: {}", i + 1, describe(c));
    }
    if let Some(c) = &v.convergence {
        let _ = writeln!(out, "  convergence to limit: {}", describe(c));
    }
}

struct Checks {
    pi: PiVerdict,
    contraction: VerificationReport,
}

impl Checks {
    fn passed(&self) -> bool {
        self.pi.member && self.contraction.passed()
    }
}

fn hypothesis_checks(problem: &Problem, report: &mut String) -> Result<Checks> {
    let pi = problem.zeta.probe_pi_membership(&PiProbe::default())?;
    match &pi.witness {
        None => {
            let _ = writeln!(report, "zeta {} in Pi: pass [{}]", problem.zeta.describe(), pi.probe.describe());
        }
        Some(w) => {
            let _ = writeln!(
                report,
                "zeta {} in Pi: FAIL, orbit from rho={} reached {} after {} steps [{}]",
                problem.zeta.describe(),
                w.rho,
                w.value,
                w.n,
                pi.probe.describe()
            );
        }
    }
    let contraction = match &problem.mapping {
        BuiltMapping::Single(f) => verify_single_contraction(&problem.fm, f, &problem.zeta, &problem.protocol)?,
        BuiltMapping::Multi(s) => verify_multi_contraction(&problem.fm, s, &problem.zeta, &problem.protocol)?,
    };
    match &contraction.counterexample {
        None => {
            let _ = writeln!(
                report,
                "{}: pass, {} checks, worst margin {} [{}]",
                contraction.condition,
                contraction.checked,
                fmt_real(contraction.worst_margin),
                contraction.protocol.describe()
            );
        }
        Some(cx) => {
            let _ = writeln!(
                report,
                "{}: FAIL counterexample {cx} [{}]",
                contraction.condition,
                contraction.protocol.describe()
            );
        }
    }
    Ok(Checks { pi, contraction })
}

fn run_problem(command: Command, problem: &Problem, opts: &RunOptions) -> Result<Artifacts> {
    let mut report = String::new();
    let tnorm = problem.fm.tnorm().clone();
    match command {
        Command::Verify => {
            let axioms = tnorm.check_axioms(TNORM_GRID)?;
            let _ = write!(report, "{axioms}");
            write_h_type(&mut report, &tnorm);
            let checks = hypothesis_checks(problem, &mut report)?;
            write_sets(&mut report, problem)?;
            let ok = axioms.passed() && checks.passed();
            let _ = writeln!(report, "verdict: {}", if ok { "all checks passed" } else { "counterexample found" });
            Ok(Artifacts {
                outcome: Outcome {
                    status: if ok { ExitStatus::Success } else { ExitStatus::Failed },
                    report,
                    certificate: None,
                    sequence: None,
                    written: Vec::new(),
                },
                certificate_kv: None,
                csv: None,
            })
        }
        Command::Solve | Command::Trace => {
            let mut verification = None;
            if opts.skip_verify {
                report.push_str("verification skipped\n");
            } else {
                let checks = hypothesis_checks(problem, &mut report)?;
                if !checks.passed() {
                    let cert = Certificate::hypothesis_failed(
                        problem.solver.x0.clone(),
                        &problem.solver,
                        checks.contraction,
                    );
                    return Ok(finish(command, problem, cert, report));
                }
                verification = Some(checks.contraction);
            }
            let mut cert = match &problem.mapping {
                BuiltMapping::Single(f) => {
                    let mut cert = solve_single(&problem.fm, f, &problem.solver)?;
                    cert.step_inequality =
                        Some(step_inequality(&problem.fm, &cert.trace, &problem.zeta, cert.rho_ref)?);
                    cert
                }
                BuiltMapping::Multi(s) => solve_multi(&problem.fm, s, &problem.zeta, &problem.solver)?,
            };
            cert.verification = verification;
            Ok(finish(command, problem, cert, report))
        }
    }
}

fn write_h_type(report: &mut String, tnorm: &TNorm) {
    let verdict = tnorm.probe_h_type(&HTypeProbe::default());
    match &verdict.witness {
        None => {
            let _ = writeln!(report, "H-type probe: not falsified [{}]", verdict.probe.describe());
        }
        Some(w) => {
            let _ = writeln!(
                report,
                "H-type probe: falsified at eps={}, rho={}, n={} (T^n(rho)={}) [informational]",
                w.eps, w.rho, w.n, w.value
            );
        }
    }
}

fn write_sets(report: &mut String, problem: &Problem) -> Result<()> {
    for (i, (a_name, a)) in problem.sets.iter().enumerate() {
        for (b_name, b) in &problem.sets[i + 1..] {
            let values = problem
                .protocol
                .rho_grid
                .iter()
                .map(|&rho| hausdorff_eval(&problem.fm, a, b, rho).map(fmt_real))
                .collect::<Result<Vec<_>>>()?;
            let _ = writeln!(report, "hausdorff({a_name}, {b_name}) over rho grid: {}", values.join(" "));
        }
    }
    Ok(())
}

fn finish(command: Command, problem: &Problem, cert: Certificate, mut report: String) -> Artifacts {
    write_certificate_report(&mut report, &cert);
    let selections = matches!(problem.mapping, BuiltMapping::Multi(_)).then_some(cert.trace.selections.as_slice());
    let csv = orbit_csv(
        &problem.fm,
        &cert.trace.iterates,
        selections,
        cert.rho_ref,
        cert.diagnostics.as_ref(),
        command == Command::Trace,
    );
    let kv = certificate_kv(&cert, problem);
    let status = match cert.status {
        Status::Converged => ExitStatus::Success,
        Status::MaxIterExceeded => ExitStatus::NotConverged,
        Status::HypothesisFailed => ExitStatus::Failed,
    };
    Artifacts {
        outcome: Outcome {
            status,
            report,
            certificate: Some(cert),
            sequence: None,
            written: Vec::new(),
        },
        certificate_kv: Some(kv),
        csv: Some(csv),
    }
}

fn write_certificate_report(report: &mut String, cert: &Certificate) {
    let _ = writeln!(report, "status: {}", cert.status.label());
    let _ = writeln!(report, "steps: {}", cert.trace.steps());
    if let Some(z) = &cert.fixed_point {
        let _ = writeln!(report, "fixed point: {z}");
    }
    if cert.status != Status::HypothesisFailed {
        let _ = writeln!(report, "final residual: {} (tol {:e})", fmt_real(cert.final_residual), cert.tol);
    }
    if let Some(u) = &cert.uniqueness {
        let _ = writeln!(
            report,
            "uniqueness: {} extra starts, all converged: {}, max endpoint spread {}",
            u.starts.len(),
            u.all_converged(),
            fmt_real(u.max_spread)
        );
    }
    if let Some(step) = &cert.step_inequality {
        let _ = writeln!(
            report,
            "per-step contraction inequality: {} ({} steps, worst margin {})",
            if step.holds() { "holds" } else { "violated" },
            step.checked,
            fmt_real(step.worst_margin)
        );
    }
    if let Some(d) = &cert.diagnostics {
        write_sequence_verdict(report, &format!("orbit diagnostics (eps={DIAGNOSTIC_EPS}, p<={DIAGNOSTIC_P_MAX})"), d);
    }
}

/// Key-value certificate, one `key=value` per line in a fixed order.
pub fn certificate_kv(cert: &Certificate, problem: &Problem) -> String {
    let mut kv = String::new();
    let mut put = |k: &str, v: String| {
        let _ = writeln!(kv, "{k}={v}");
    };
    put("status", cert.status.label().into());
    put(
        "mapping",
        match problem.mapping {
            BuiltMapping::Single(_) => "single".into(),
            BuiltMapping::Multi(_) => "multi".into(),
        },
    );
    put("steps", cert.trace.steps().to_string());
    put("fixed_point", cert.fixed_point.as_ref().map(fmt_point).unwrap_or_default());
    put("final_residual", fmt_real(cert.final_residual));
    put("tol", fmt_real(cert.tol));
    put("rho_ref", fmt_real(cert.rho_ref));
    put("seed", problem.protocol.seed.to_string());
    if let Some(scale) = cert.selection_scale {
        put("selection_scale", fmt_real(scale));
    }
    if let Some(report) = &cert.verification {
        put("verification", if report.passed() { "passed" } else { "failed" }.into());
        put("verification.checked", report.checked.to_string());
        if let Some(cx) = &report.counterexample {
            put("verification.counterexample.u", fmt_point(&cx.u));
            put("verification.counterexample.v", fmt_point(&cx.v));
            put("verification.counterexample.rho", fmt_real(cx.rho));
            put("verification.counterexample.lhs", fmt_real(cx.lhs));
            put("verification.counterexample.rhs", fmt_real(cx.rhs));
        }
    }
    if let Some(u) = &cert.uniqueness {
        put("uniqueness.starts", u.starts.len().to_string());
        put("uniqueness.all_converged", u.all_converged().to_string());
        put("uniqueness.max_spread", fmt_real(u.max_spread));
    }
    if let Some(step) = &cert.step_inequality {
        put("step_inequality.holds", step.holds().to_string());
        put("step_inequality.worst_margin", fmt_real(step.worst_margin));
    }
    if let Some(d) = &cert.diagnostics {
        put("diagnostics.eps", fmt_real(d.eps));
        for (i, c) in d.per_gap.iter().enumerate() {
            put(&format!("diagnostics.g_cauchy.p{}", i + 1), tail_kv(c));
        }
        put("diagnostics.cauchy", tail_kv(&d.cauchy));
    }
    kv
}

fn tail_kv(c: &crate::fuzzy_metric::TailCheck) -> String {
    if c.certified {
        format!("certified@{}", c.start)
    } else {
        "failed".into()
    }
}

/// CSV of an orbit or sequence: `n`, coordinates, `theta_step`, optionally
/// `branch_index`, and with `diagnostics_columns` the gap values
/// `theta_p1..` plus running `g_cauchy` / `cauchy` flags.
pub fn orbit_csv(
    fm: &FuzzyMetric,
    iterates: &[Point],
    selections: Option<&[usize]>,
    rho: f64,
    verdict: Option<&SequenceVerdict>,
    diagnostics_columns: bool,
) -> String {
    let dim = iterates.first().map_or(0, Point::dim);
    let p_max = verdict.map_or(DIAGNOSTIC_P_MAX, |v| v.p_max);
    let mut out = String::from("n");
    for i in 0..dim {
        let _ = write!(out, ",u{i}");
    }
    out.push_str(",theta_step");
    if selections.is_some() {
        out.push_str(",branch_index");
    }
    if diagnostics_columns {
        for p in 1..=p_max {
            let _ = write!(out, ",theta_p{p}");
        }
        out.push_str(",g_cauchy,cauchy");
    }
    out.push('\n');

    for (n, u) in iterates.iter().enumerate() {
        let _ = write!(out, "{n}");
        for c in u.iter() {
            let _ = write!(out, ",{}", fmt_real(*c));
        }
        let step = iterates.get(n + 1).map(|v| fmt_real(fm.theta(u, v, rho)));
        let _ = write!(out, ",{}", step.unwrap_or_default());
        if let Some(sel) = selections {
            let _ = write!(out, ",{}", sel.get(n).map(|b| b.to_string()).unwrap_or_default());
        }
        if diagnostics_columns {
            for p in 1..=p_max {
                let value = iterates.get(n + p).map(|v| fmt_real(fm.theta(u, v, rho)));
                let _ = write!(out, ",{}", value.unwrap_or_default());
            }
            // A single-point orbit is vacuously certified.
            let (g, c) = verdict.map_or((true, true), |v| (v.g_cauchy.flag(n), v.cauchy.flag(n)));
            let _ = write!(out, ",{},{}", u8::from(g), u8::from(c));
        }
        out.push('\n');
    }
    out
}

impl From<Error> for Outcome {
    fn from(e: Error) -> Self {
        Outcome::failed(format!("error: {e}\n"))
    }
}
