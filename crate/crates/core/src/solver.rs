//! Picard-orbit solvers with convergence certificates.
//!
//! Single-valued runs iterate `u_{n+1} = f(u_n)`. Multi-valued runs pick
//! `u_{n+1}` from `S(u_n)` as the point nearest to `u_n` at scale `ζ(ρ_ref)`.
//! Both stop on a residual measured in the fuzzy metric itself:
//! `1 - Θ(u_n, u_{n+1}, ρ_ref)` or `1 - Θ(u_n, S(u_n), ρ_ref)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::contraction::{verify_metric_condition, MultiMap, SamplingProtocol, SingleMap, VerificationReport, ZetaFn};
use crate::error::check_positive;
use crate::fuzzy_metric::{FuzzyMetric, PointSpace, SequenceVerdict};
use crate::hausdorff::{point_to_set, point_to_set_unchecked};
use crate::{BoundingBox, Error, Point, Result, CHECK_TOLERANCE};

/// Tail tolerance of the orbit G-Cauchy diagnostic.
pub const DIAGNOSTIC_EPS: f64 = 0.01;
/// Largest gap checked by the orbit G-Cauchy diagnostic.
pub const DIAGNOSTIC_P_MAX: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub x0: Point,
    /// Residual threshold on `1 - Θ`, in `(0, 1)`.
    pub tol: f64,
    pub max_iter: usize,
    pub rho_ref: f64,
    /// Extra random starts used to cross-check uniqueness of the fixed point.
    pub uniqueness_starts: usize,
    /// Seed and box for the extra starts.
    pub seed: u64,
    pub start_box: BoundingBox,
}

impl SolverConfig {
    pub fn new(x0: impl Into<Point>) -> Self {
        SolverConfig {
            x0: x0.into(),
            tol: 1e-9,
            max_iter: 10_000,
            rho_ref: 1.0,
            uniqueness_starts: 3,
            seed: 0,
            start_box: BoundingBox::default(),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::domain("tol", self.tol, "(0, 1)"));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        check_positive("rho_ref", self.rho_ref)?;
        self.x0.ensure_dim(dim)?;
        if !self.x0.is_finite() {
            return Err(Error::NonFinite(format!("x0 = {}", self.x0)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIterExceeded,
    HypothesisFailed,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxIterExceeded => "max_iter_exceeded",
            Status::HypothesisFailed => "hypothesis_failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OrbitTrace {
    pub iterates: Vec<Point>,
    /// `Θ(u_n, u_{n+1}, ρ_ref)`, one shorter than `iterates`.
    pub step_residuals: Vec<f64>,
    /// Multi-valued runs only: the branch that produced `u_{n+1}`.
    pub selections: Vec<usize>,
    /// Metric-space runs only: `d(u_n, u_{n+1})`.
    pub metric_steps: Vec<f64>,
}

impl OrbitTrace {
    fn start(x0: Point) -> Self {
        OrbitTrace {
            iterates: vec![x0],
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.iterates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterates.is_empty()
    }

    /// Number of steps taken.
    pub fn steps(&self) -> usize {
        self.step_residuals.len()
    }
}

/// Per-step check of `Θ(u_{n+1}, u_{n+2}, ζ(ρ)) >= Θ(u_n, u_{n+1}, ρ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepInequality {
    pub rho: f64,
    pub checked: usize,
    pub worst_margin: f64,
    /// First violating `(n, lhs, rhs)`.
    pub violation: Option<(usize, f64, f64)>,
}

impl StepInequality {
    pub fn holds(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks the per-step contraction inequality along a produced orbit.
pub fn step_inequality(
    fm: &FuzzyMetric,
    trace: &OrbitTrace,
    zeta: &ZetaFn,
    rho: f64,
) -> Result<StepInequality> {
    let scaled = zeta.apply(rho)?;
    let it = &trace.iterates;
    let mut out = StepInequality {
        rho,
        checked: 0,
        worst_margin: f64::INFINITY,
        violation: None,
    };
    for n in 0..it.len().saturating_sub(2) {
        let lhs = fm.theta(&it[n + 1], &it[n + 2], scaled);
        let rhs = fm.theta(&it[n], &it[n + 1], rho);
        out.checked += 1;
        out.worst_margin = out.worst_margin.min(lhs - rhs);
        if lhs < rhs - CHECK_TOLERANCE && out.violation.is_none() {
            out.violation = Some((n, lhs, rhs));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessCheck {
    pub starts: Vec<Point>,
    /// Endpoint per start; `None` if that run did not converge.
    pub endpoints: Vec<Option<Point>>,
    /// Largest pairwise distance among the main fixed point and the converged endpoints.
    pub max_spread: f64,
}

impl UniquenessCheck {
    pub fn all_converged(&self) -> bool {
        self.endpoints.iter().all(Option::is_some)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub status: Status,
    pub fixed_point: Option<Point>,
    /// `1 - Θ(z, f(z), ρ_ref)` (single) or `1 - Θ(z, S(z), ρ_ref)` (multi) at
    /// the returned point; for unconverged runs, the last step residual.
    pub final_residual: f64,
    pub trace: OrbitTrace,
    pub rho_ref: f64,
    pub tol: f64,
    /// Multi-valued runs: the scale `ζ(ρ_ref)` used for selection.
    pub selection_scale: Option<f64>,
    /// Tail diagnostics of the orbit at `(DIAGNOSTIC_EPS, ρ_ref, DIAGNOSTIC_P_MAX)`.
    pub diagnostics: Option<SequenceVerdict>,
    pub step_inequality: Option<StepInequality>,
    pub uniqueness: Option<UniquenessCheck>,
    pub verification: Option<VerificationReport>,
}

impl Certificate {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }

    pub(crate) fn hypothesis_failed(x0: Point, cfg: &SolverConfig, report: VerificationReport) -> Self {
        Certificate {
            status: Status::HypothesisFailed,
            fixed_point: None,
            final_residual: f64::NAN,
            trace: OrbitTrace::start(x0),
            rho_ref: cfg.rho_ref,
            tol: cfg.tol,
            selection_scale: None,
            diagnostics: None,
            step_inequality: None,
            uniqueness: None,
            verification: Some(report),
        }
    }
}

fn diagnostics(fm: &FuzzyMetric, trace: &OrbitTrace, rho: f64, limit: Option<&Point>) -> Result<Option<SequenceVerdict>> {
    if trace.len() < 2 {
        return Ok(None);
    }
    fm.classify_sequence_with_limit(&trace.iterates, DIAGNOSTIC_EPS, rho, DIAGNOSTIC_P_MAX, limit)
        .map(Some)
}

struct Run {
    trace: OrbitTrace,
    fixed_point: Option<Point>,
    final_residual: f64,
}

fn picard(fm: &FuzzyMetric, f: &SingleMap, x0: &Point, cfg: &SolverConfig) -> Result<Run> {
    let mut trace = OrbitTrace::start(x0.clone());
    let mut next = f.apply(x0)?;
    let mut final_residual = f64::NAN;
    for _ in 0..cfg.max_iter {
        let current = trace.iterates.last().expect("nonempty");
        let theta = fm.theta(current, &next, cfg.rho_ref);
        trace.step_residuals.push(theta);
        trace.iterates.push(next);
        let z = trace.iterates.last().expect("nonempty");
        let after = f.apply(z)?;
        final_residual = 1.0 - theta;
        if 1.0 - theta <= cfg.tol {
            let at_z = 1.0 - fm.theta(z, &after, cfg.rho_ref);
            if at_z <= cfg.tol {
                return Ok(Run {
                    fixed_point: Some(z.clone()),
                    final_residual: at_z,
                    trace,
                });
            }
        }
        next = after;
    }
    Ok(Run {
        trace,
        fixed_point: None,
        final_residual,
    })
}

/// Iterates `f` from `cfg.x0` until the step residual drops below `cfg.tol`.
///
/// On convergence `cfg.uniqueness_starts` further orbits are run from seeded
/// random starts in `cfg.start_box` and their endpoints compared.
pub fn solve_single(fm: &FuzzyMetric, f: &SingleMap, cfg: &SolverConfig) -> Result<Certificate> {
    if f.dim() != fm.dim() {
        return Err(Error::Dimension {
            expected: fm.dim(),
            got: f.dim(),
        });
    }
    cfg.validate(fm.dim())?;
    let run = picard(fm, f, &cfg.x0, cfg)?;

    let uniqueness = match &run.fixed_point {
        Some(z) if cfg.uniqueness_starts > 0 => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let starts: Vec<Point> = (0..cfg.uniqueness_starts)
                .map(|_| cfg.start_box.sample(&mut rng, fm.dim()))
                .collect();
            let endpoints = starts
                .iter()
                .map(|s| picard(fm, f, s, cfg).map(|r| r.fixed_point))
                .collect::<Result<Vec<_>>>()?;
            let mut all = vec![z];
            all.extend(endpoints.iter().flatten());
            let mut max_spread = 0.0f64;
            for (i, a) in all.iter().enumerate() {
                for b in &all[i + 1..] {
                    max_spread = max_spread.max(fm.space().spread_distance(a, b));
                }
            }
            Some(UniquenessCheck {
                starts,
                endpoints,
                max_spread,
            })
        }
        _ => None,
    };

    let diagnostics = diagnostics(fm, &run.trace, cfg.rho_ref, run.fixed_point.as_ref())?;
    Ok(Certificate {
        status: if run.fixed_point.is_some() {
            Status::Converged
        } else {
            Status::MaxIterExceeded
        },
        fixed_point: run.fixed_point,
        final_residual: run.final_residual,
        trace: run.trace,
        rho_ref: cfg.rho_ref,
        tol: cfg.tol,
        selection_scale: None,
        diagnostics,
        step_inequality: None,
        uniqueness,
        verification: None,
    })
}

/// Builds a multi-valued orbit by nearest-image selection and stops once the
/// current iterate is (within `cfg.tol`) a member of its own image.
pub fn solve_multi(fm: &FuzzyMetric, s: &MultiMap, zeta: &ZetaFn, cfg: &SolverConfig) -> Result<Certificate> {
    if s.dim() != fm.dim() {
        return Err(Error::Dimension {
            expected: fm.dim(),
            got: s.dim(),
        });
    }
    cfg.validate(fm.dim())?;
    let scale = zeta.apply(cfg.rho_ref)?;
    let mut trace = OrbitTrace::start(cfg.x0.clone());
    let mut fixed_point = None;
    let mut final_residual = f64::NAN;

    for n in 0..=cfg.max_iter {
        let current = trace.iterates.last().expect("nonempty").clone();
        let image = s.image(&current)?;
        let residual = 1.0 - point_to_set_unchecked(fm, &current, &image.set, cfg.rho_ref).value;
        final_residual = residual;
        if residual <= cfg.tol {
            fixed_point = Some(current);
            break;
        }
        if n == cfg.max_iter {
            break;
        }
        let chosen = point_to_set_unchecked(fm, &current, &image.set, scale);
        let next = chosen.witness.clone();
        trace.step_residuals.push(fm.theta(&current, &next, cfg.rho_ref));
        trace.selections.push(image.branch_of[chosen.index]);
        trace.iterates.push(next);
    }

    let diagnostics = diagnostics(fm, &trace, cfg.rho_ref, fixed_point.as_ref())?;
    let step_inequality = Some(step_inequality(fm, &trace, zeta, cfg.rho_ref)?);
    Ok(Certificate {
        status: if fixed_point.is_some() {
            Status::Converged
        } else {
            Status::MaxIterExceeded
        },
        fixed_point,
        final_residual,
        trace,
        rho_ref: cfg.rho_ref,
        tol: cfg.tol,
        selection_scale: Some(scale),
        diagnostics,
        step_inequality,
        uniqueness: None,
        verification: None,
    })
}

/// Ordinary-metric entry point: checks `ρ·d(fu, fv) <= ζ(ρ)·d(u, v)` on
/// samples, then runs [`solve_single`] over the standard fuzzy metric
/// `ρ / (ρ + d)`.
pub fn solve_classic(
    space: &PointSpace,
    f: &SingleMap,
    zeta: &ZetaFn,
    cfg: &SolverConfig,
    protocol: &SamplingProtocol,
) -> Result<Certificate> {
    let fm = FuzzyMetric::standard(space.clone())?;
    cfg.validate(space.dim())?;
    let report = verify_metric_condition(space, f, zeta, protocol)?;
    if !report.passed() {
        return Ok(Certificate::hypothesis_failed(cfg.x0.clone(), cfg, report));
    }
    let mut cert = solve_single(&fm, f, cfg)?;
    cert.trace.metric_steps = cert
        .trace
        .iterates
        .windows(2)
        .map(|w| space.distance(&w[0], &w[1]))
        .collect::<Result<_>>()?;
    cert.step_inequality = Some(step_inequality(&fm, &cert.trace, zeta, cfg.rho_ref)?);
    cert.verification = Some(report);
    Ok(cert)
}

/// `1 - Θ(x, S(x), ρ)`; zero exactly when `x ∈ S(x)`.
pub fn inclusion_residual(fm: &FuzzyMetric, x: &Point, s: &MultiMap, rho: f64) -> Result<f64> {
    check_positive("rho", rho)?;
    let image = s.image(x)?;
    Ok(1.0 - point_to_set(fm, x, &image.set, rho)?.value)
}
