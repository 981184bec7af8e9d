//! Fuzzy metric spaces in the George–Veeramani sense.
//!
//! A [`FuzzyMetric`] grades how close two points are at scale `ρ > 0` with a
//! value in `(0, 1]`, and satisfies a triangle inequality through its
//! [`TNorm`]. The standard construction `ρ / (ρ + d(u, v))` turns any
//! ordinary metric into one.

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::check_positive;
use crate::report::{AxiomCheck, AxiomReport, Counterexample};
use crate::tnorm::TNorm;
use crate::{BoundingBox, Error, Point, Result, CHECK_TOLERANCE};

type DistanceFn = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;
type FuzzyFn = dyn Fn(&Point, &Point, f64) -> f64 + Send + Sync;

#[derive(Clone)]
pub enum Metric {
    Euclidean,
    Custom { name: String, distance: Arc<DistanceFn> },
}

impl Metric {
    pub fn custom<F>(name: impl Into<String>, distance: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    {
        Metric::Custom {
            name: name.into(),
            distance: Arc::new(distance),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Custom { name, .. } => name,
        }
    }

    fn distance(&self, u: &Point, v: &Point) -> f64 {
        match self {
            Metric::Euclidean => u.euclidean(v),
            Metric::Custom { distance, .. } => distance(u, v),
        }
    }
}

impl fmt::Debug for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Metric({})", self.name())
    }
}

/// Real vectors of a fixed dimension, optionally carrying an ordinary metric.
#[derive(Debug, Clone)]
pub struct PointSpace {
    dim: usize,
    metric: Option<Metric>,
}

impl PointSpace {
    pub fn euclidean(dim: usize) -> Self {
        PointSpace {
            dim,
            metric: Some(Metric::Euclidean),
        }
    }

    pub fn with_metric(dim: usize, metric: Metric) -> Self {
        PointSpace {
            dim,
            metric: Some(metric),
        }
    }

    /// A space with no base metric, for use with custom fuzzy evaluators.
    pub fn bare(dim: usize) -> Self {
        PointSpace { dim, metric: None }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> Option<&Metric> {
        self.metric.as_ref()
    }

    pub fn distance(&self, u: &Point, v: &Point) -> Result<f64> {
        let metric = self
            .metric
            .as_ref()
            .ok_or_else(|| Error::Config("point space has no base metric".into()))?;
        u.ensure_dim(self.dim)?;
        v.ensure_dim(self.dim)?;
        Ok(metric.distance(u, v))
    }

    /// Distance used for reporting spreads: the base metric when present,
    /// Euclidean otherwise.
    pub(crate) fn spread_distance(&self, u: &Point, v: &Point) -> f64 {
        match &self.metric {
            Some(m) => m.distance(u, v),
            None => u.euclidean(v),
        }
    }

    /// Samples the metric axioms on seeded random triples.
    pub fn check_metric(&self, samples: usize, seed: u64, bbox: BoundingBox) -> Result<AxiomReport> {
        let metric = self
            .metric
            .as_ref()
            .ok_or_else(|| Error::Config("point space has no base metric".into()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tol = CHECK_TOLERANCE;
        let mut identity = AxiomCheck::new("identity");
        let mut symmetry = AxiomCheck::new("symmetry");
        let mut triangle = AxiomCheck::new("triangle");
        for _ in 0..samples {
            let u = bbox.sample(&mut rng, self.dim);
            let v = bbox.sample(&mut rng, self.dim);
            let z = bbox.sample(&mut rng, self.dim);
            let duu = metric.distance(&u, &u);
            identity.record(duu == 0.0, || Counterexample {
                values: vec![duu],
                detail: format!("d(u,u) at u={u}"),
            });
            let (duv, dvu) = (metric.distance(&u, &v), metric.distance(&v, &u));
            symmetry.record((duv - dvu).abs() <= tol, || Counterexample {
                values: vec![duv, dvu],
                detail: format!("d(u,v), d(v,u) at u={u}, v={v}"),
            });
            let (duz, dvz) = (metric.distance(&u, &z), metric.distance(&v, &z));
            triangle.record(duz <= duv + dvz + tol, || Counterexample {
                values: vec![duz, duv, dvz],
                detail: format!("d(u,z), d(u,v), d(v,z) at u={u}, v={v}, z={z}"),
            });
        }
        Ok(AxiomReport {
            subject: format!("metric {}", metric.name()),
            protocol: format!("{samples} samples, seed {seed}, box [{}, {}]", bbox.lo, bbox.hi),
            checks: vec![identity, symmetry, triangle],
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FuzzyKind {
    Standard,
    Custom,
}

#[derive(Clone)]
enum Evaluator {
    Standard,
    Custom { name: String, f: Arc<FuzzyFn> },
}

#[derive(Clone)]
pub struct FuzzyMetric {
    space: PointSpace,
    tnorm: TNorm,
    evaluator: Evaluator,
}

impl fmt::Debug for FuzzyMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FuzzyMetric")
            .field("space", &self.space)
            .field("tnorm", &self.tnorm)
            .field("evaluator", &self.evaluator_name())
            .finish()
    }
}

impl FuzzyMetric {
    /// `Θ(u, v, ρ) = ρ / (ρ + d(u, v))` paired with the product t-norm.
    pub fn standard(space: PointSpace) -> Result<Self> {
        if space.metric.is_none() {
            return Err(Error::Config(
                "the standard fuzzy metric needs a base metric".into(),
            ));
        }
        Ok(FuzzyMetric {
            space,
            tnorm: TNorm::Product,
            evaluator: Evaluator::Standard,
        })
    }

    pub fn custom<F>(space: PointSpace, tnorm: TNorm, name: impl Into<String>, f: F) -> Self
    where
        F: Fn(&Point, &Point, f64) -> f64 + Send + Sync + 'static,
    {
        FuzzyMetric {
            space,
            tnorm,
            evaluator: Evaluator::Custom {
                name: name.into(),
                f: Arc::new(f),
            },
        }
    }

    /// Replaces the t-norm. The standard construction remains a fuzzy metric
    /// under any t-norm bounded by the product, and under the minimum.
    pub fn with_tnorm(mut self, tnorm: TNorm) -> Self {
        self.tnorm = tnorm;
        self
    }

    pub fn space(&self) -> &PointSpace {
        &self.space
    }

    pub fn tnorm(&self) -> &TNorm {
        &self.tnorm
    }

    pub fn kind(&self) -> FuzzyKind {
        match self.evaluator {
            Evaluator::Standard => FuzzyKind::Standard,
            Evaluator::Custom { .. } => FuzzyKind::Custom,
        }
    }

    pub fn evaluator_name(&self) -> &str {
        match &self.evaluator {
            Evaluator::Standard => "standard",
            Evaluator::Custom { name, .. } => name,
        }
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    /// `Θ(u, v, ρ)` without argument validation.
    pub(crate) fn theta(&self, u: &Point, v: &Point, rho: f64) -> f64 {
        match &self.evaluator {
            Evaluator::Standard => {
                let d = self
                    .space
                    .metric
                    .as_ref()
                    .expect("standard evaluator has a metric")
                    .distance(u, v);
                rho / (rho + d)
            }
            Evaluator::Custom { f, .. } => f(u, v, rho),
        }
    }

    pub fn eval(&self, u: &Point, v: &Point, rho: f64) -> Result<f64> {
        check_positive("rho", rho)?;
        u.ensure_dim(self.dim())?;
        v.ensure_dim(self.dim())?;
        let value = self.theta(u, v, rho);
        if value > 0.0 && value <= 1.0 {
            Ok(value)
        } else {
            Err(Error::Range(format!(
                "fuzzy metric {} returned {value} at ({u}, {v}, {rho})",
                self.evaluator_name()
            )))
        }
    }

    pub fn check_axioms(&self, sample_count: usize, rho_grid: &[f64], seed: u64) -> Result<AxiomReport> {
        self.check_axioms_in(sample_count, rho_grid, seed, BoundingBox::default())
    }

    /// Checks the fuzzy metric axioms on `sample_count` seeded random triples
    /// drawn from `bbox`, over every `ρ` (and `(ρ, s)` pair) of `rho_grid`.
    pub fn check_axioms_in(
        &self,
        sample_count: usize,
        rho_grid: &[f64],
        seed: u64,
        bbox: BoundingBox,
    ) -> Result<AxiomReport> {
        if sample_count == 0 {
            return Err(Error::Config("sample_count must be at least 1".into()));
        }
        if rho_grid.is_empty() {
            return Err(Error::Config("rho grid must be nonempty".into()));
        }
        for &rho in rho_grid {
            check_positive("rho", rho)?;
        }
        let tol = CHECK_TOLERANCE;
        const STEP: f64 = 1e-6;
        const MAX_JUMP: f64 = 1e-3;

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut positivity = AxiomCheck::new("positivity");
        let mut identity = AxiomCheck::new("identity");
        let mut symmetry = AxiomCheck::new("symmetry");
        let mut triangle = AxiomCheck::new("triangle");
        let mut monotone = AxiomCheck::new("monotone-in-rho");
        let mut continuity = AxiomCheck::new("continuity");

        for _ in 0..sample_count {
            let u = bbox.sample(&mut rng, self.dim());
            let v = bbox.sample(&mut rng, self.dim());
            let z = bbox.sample(&mut rng, self.dim());
            for &rho in rho_grid {
                let uv = self.theta(&u, &v, rho);
                let vu = self.theta(&v, &u, rho);
                positivity.record(uv > 0.0 && uv <= 1.0, || Counterexample {
                    values: vec![rho, uv],
                    detail: format!("(rho, theta) at u={u}, v={v}"),
                });
                let uu = self.theta(&u, &u, rho);
                identity.record((uu - 1.0).abs() <= tol, || Counterexample {
                    values: vec![rho, uu],
                    detail: format!("(rho, theta(u,u)) at u=v={u}"),
                });
                if u != v {
                    identity.record(uv < 1.0, || Counterexample {
                        values: vec![rho, uv],
                        detail: format!("(rho, theta) equals 1 for distinct u={u}, v={v}"),
                    });
                }
                symmetry.record((uv - vu).abs() <= tol, || Counterexample {
                    values: vec![rho, uv, vu],
                    detail: format!("(rho, theta(u,v), theta(v,u)) at u={u}, v={v}"),
                });
                let nudged = self.theta(&u, &v, rho * (1.0 + STEP));
                monotone.record(nudged >= uv - tol, || Counterexample {
                    values: vec![rho, uv, nudged],
                    detail: format!("(rho, theta(rho), theta(rho(1+1e-6))) at u={u}, v={v}"),
                });
                continuity.record((nudged - uv).abs() <= MAX_JUMP, || Counterexample {
                    values: vec![rho, uv, nudged],
                    detail: format!("(rho, theta(rho), theta(rho(1+1e-6))) at u={u}, v={v}"),
                });
                for &s in rho_grid {
                    let vz = self.theta(&v, &z, s);
                    let uz = self.theta(&u, &z, rho + s);
                    let bound = self.tnorm.apply(uv.clamp(0.0, 1.0), vz.clamp(0.0, 1.0))?;
                    triangle.record(uz >= bound - tol, || Counterexample {
                        values: vec![rho, s, uz, uv, vz],
                        detail: format!(
                            "(rho, s, theta(u,z,rho+s), theta(u,v,rho), theta(v,z,s)) at u={u}, v={v}, z={z}"
                        ),
                    });
                }
            }
        }

        Ok(AxiomReport {
            subject: format!(
                "fuzzy metric {} with t-norm {}",
                self.evaluator_name(),
                self.tnorm.name()
            ),
            protocol: format!(
                "{sample_count} triples, seed {seed}, box [{}, {}], rho grid {rho_grid:?}, tolerance {tol:e}",
                bbox.lo, bbox.hi
            ),
            checks: vec![positivity, identity, symmetry, triangle, monotone, continuity],
        })
    }

    /// See [`classify_sequence_with_limit`](Self::classify_sequence_with_limit).
    pub fn classify_sequence(
        &self,
        seq: &[Point],
        eps: f64,
        rho: f64,
        p_max: usize,
    ) -> Result<SequenceVerdict> {
        self.classify_sequence_with_limit(seq, eps, rho, p_max, None)
    }

    /// Classifies a finite prefix of a sequence.
    ///
    /// For each condition the least `N` is found such that every tested pair
    /// with first index `>= N` satisfies `Θ > 1 - eps`. The condition is
    /// certified only if `N <= len / 2`, i.e. it holds over at least the second
    /// half of the prefix. Otherwise a violating pair from that half is
    /// reported.
    pub fn classify_sequence_with_limit(
        &self,
        seq: &[Point],
        eps: f64,
        rho: f64,
        p_max: usize,
        limit: Option<&Point>,
    ) -> Result<SequenceVerdict> {
        if seq.len() < 2 {
            return Err(Error::Config("sequence needs at least two terms".into()));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::domain("eps", eps, "(0, 1)"));
        }
        check_positive("rho", rho)?;
        if p_max == 0 {
            return Err(Error::Config("p_max must be at least 1".into()));
        }
        for x in seq.iter().chain(limit) {
            x.ensure_dim(self.dim())?;
        }
        let len = seq.len();
        let tail_bound = len / 2;
        let threshold = 1.0 - eps;
        let good = |a: &Point, b: &Point| self.theta(a, b, rho) > threshold;

        // Cauchy: scan first indices downward; the first bad one fixes N.
        let mut cauchy_bad = None;
        'outer: for n in (0..len).rev() {
            for m in n + 1..len {
                if !good(&seq[n], &seq[m]) {
                    cauchy_bad = Some((n, m));
                    break 'outer;
                }
            }
        }
        let cauchy = TailCheck::from_last_violation(cauchy_bad, tail_bound, |n, m| {
            self.theta(&seq[n], &seq[m], rho)
        });

        let per_gap: Vec<TailCheck> = (1..=p_max)
            .map(|p| {
                let bad = (0..len.saturating_sub(p))
                    .rev()
                    .find(|&n| !good(&seq[n], &seq[n + p]))
                    .map(|n| (n, n + p));
                TailCheck::from_last_violation(bad, tail_bound, |n, m| {
                    self.theta(&seq[n], &seq[m], rho)
                })
            })
            .collect();
        let g_cauchy = per_gap
            .iter()
            .max_by_key(|c| c.start)
            .cloned()
            .expect("p_max >= 1");

        let convergence = limit.map(|x| {
            let bad = (0..len).rev().find(|&n| !good(&seq[n], x)).map(|n| (n, n));
            let mut check = TailCheck::from_last_violation(bad, tail_bound, |n, _| {
                self.theta(&seq[n], x, rho)
            });
            // Pair (n, n) here stands for (x_n, limit).
            if let Some(w) = check.witness.as_mut() {
                w.second = usize::MAX;
            }
            check
        });

        let classification = match (&convergence, limit) {
            (Some(c), Some(x)) if c.certified => SequenceClass::ConvergentTo(x.clone()),
            _ if cauchy.certified => SequenceClass::Cauchy,
            _ if g_cauchy.certified => SequenceClass::GCauchy,
            _ => SequenceClass::NoneDetected,
        };

        Ok(SequenceVerdict {
            classification,
            eps,
            rho,
            p_max,
            len,
            tail_bound,
            cauchy,
            g_cauchy,
            per_gap,
            convergence,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SequenceClass {
    ConvergentTo(Point),
    Cauchy,
    GCauchy,
    NoneDetected,
}

impl SequenceClass {
    pub fn label(&self) -> &'static str {
        match self {
            SequenceClass::ConvergentTo(_) => "convergent",
            SequenceClass::Cauchy => "cauchy",
            SequenceClass::GCauchy => "g-cauchy",
            SequenceClass::NoneDetected => "none-detected",
        }
    }
}

/// A pair `(first, second)` of sequence indices with `Θ(x_first, x_second, ρ) <= 1 - eps`.
/// When checking convergence `second` is `usize::MAX` and stands for the limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexWitness {
    pub first: usize,
    pub second: usize,
    pub theta: f64,
}

/// Outcome of one tail condition on a finite prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct TailCheck {
    /// Least `N` from which every tested pair passes.
    pub start: usize,
    /// `start <= len / 2`.
    pub certified: bool,
    /// Last violating pair; present whenever the condition is not certified.
    pub witness: Option<IndexWitness>,
}

impl TailCheck {
    fn from_last_violation(
        last_bad: Option<(usize, usize)>,
        tail_bound: usize,
        theta: impl Fn(usize, usize) -> f64,
    ) -> Self {
        match last_bad {
            None => TailCheck {
                start: 0,
                certified: true,
                witness: None,
            },
            Some((n, m)) => {
                let start = n + 1;
                let certified = start <= tail_bound;
                TailCheck {
                    start,
                    certified,
                    witness: (!certified).then(|| IndexWitness {
                        first: n,
                        second: m,
                        theta: theta(n, m),
                    }),
                }
            }
        }
    }

    /// Whether index `n` lies in the certified tail.
    pub fn flag(&self, n: usize) -> bool {
        self.certified && n >= self.start
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceVerdict {
    pub classification: SequenceClass,
    pub eps: f64,
    pub rho: f64,
    pub p_max: usize,
    pub len: usize,
    /// Largest admissible certified start, `len / 2`.
    pub tail_bound: usize,
    pub cauchy: TailCheck,
    /// The hardest of `per_gap`.
    pub g_cauchy: TailCheck,
    /// One check per gap `p = 1..=p_max`.
    pub per_gap: Vec<TailCheck>,
    pub convergence: Option<TailCheck>,
}
