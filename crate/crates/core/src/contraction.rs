//! ζ functions, mappings, and sample-based ζ-contraction checks.
//!
//! A mapping `f` is a ζ-contraction when `Θ(fu, fv, ζ(ρ)) >= Θ(u, v, ρ)` for
//! all `u, v, ρ`; a multi-valued `S` when `Υ(Su, Sv, ζ(ρ)) >= Θ(u, v, ρ)`.
//! Both are checked here on seeded random pairs, so a pass means "no
//! counterexample at this protocol", never a proof.

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::check_positive;
use crate::fuzzy_metric::{FuzzyMetric, PointSpace};
use crate::hausdorff::{hausdorff_unchecked, FiniteCompactSet};
use crate::{BoundingBox, Error, Point, Result, CHECK_TOLERANCE};

type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;
type PointFn = dyn Fn(&Point) -> Point + Send + Sync;

#[derive(Clone)]
pub enum ZetaFn {
    /// `ζ(ρ) = kρ`
    Linear { k: f64 },
    Custom { name: String, f: Arc<ScalarFn> },
}

impl fmt::Debug for ZetaFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZetaFn::Linear { k } => write!(f, "ZetaFn::Linear(k={k})"),
            ZetaFn::Custom { name, .. } => write!(f, "ZetaFn::Custom({name})"),
        }
    }
}

impl ZetaFn {
    pub fn linear(k: f64) -> Result<Self> {
        check_positive("k", k)?;
        Ok(ZetaFn::Linear { k })
    }

    pub fn custom<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        ZetaFn::Custom {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ZetaFn::Linear { k } => format!("linear k={k}"),
            ZetaFn::Custom { name, .. } => name.clone(),
        }
    }

    pub fn apply(&self, rho: f64) -> Result<f64> {
        check_positive("rho", rho)?;
        self.apply_positive(rho)
    }

    fn apply_positive(&self, rho: f64) -> Result<f64> {
        let value = match self {
            ZetaFn::Linear { k } => k * rho,
            ZetaFn::Custom { f, .. } => f(rho),
        };
        if value > 0.0 && !value.is_nan() {
            Ok(value)
        } else {
            Err(Error::Range(format!(
                "zeta {} returned {value} at rho={rho}",
                self.describe()
            )))
        }
    }

    /// Bounded check that `ζⁿ(ρ) → 0` from every sample.
    pub fn probe_pi_membership(&self, probe: &PiProbe) -> Result<PiVerdict> {
        let mut witness: Option<PiWitness> = None;
        for &rho in &probe.rho_samples {
            let mut value = rho;
            let mut n = 0;
            let mut descended = false;
            while n < probe.n_max {
                value = self.apply(value)?;
                n += 1;
                if value < probe.eps_pi {
                    descended = true;
                    break;
                }
                if value > probe.divergence_cap {
                    break;
                }
            }
            // Keep the worst offender: the orbit that ended highest.
            if !descended && witness.as_ref().is_none_or(|w| value > w.value) {
                witness = Some(PiWitness {
                    rho,
                    n,
                    value,
                    diverged: value > probe.divergence_cap,
                });
            }
        }
        Ok(PiVerdict {
            member: witness.is_none(),
            witness,
            probe: probe.clone(),
        })
    }
}

/// Bounds for [`ZetaFn::probe_pi_membership`].
#[derive(Debug, Clone, PartialEq)]
pub struct PiProbe {
    pub rho_samples: Vec<f64>,
    pub eps_pi: f64,
    pub n_max: usize,
    pub divergence_cap: f64,
}

impl PiProbe {
    pub fn new(rho_samples: Vec<f64>, eps_pi: f64, n_max: usize) -> Result<Self> {
        if rho_samples.is_empty() {
            return Err(Error::Config("Pi probe needs at least one rho sample".into()));
        }
        for &rho in &rho_samples {
            check_positive("rho sample", rho)?;
        }
        check_positive("eps_pi", eps_pi)?;
        if n_max == 0 {
            return Err(Error::Config("n_max must be at least 1".into()));
        }
        Ok(PiProbe {
            rho_samples,
            eps_pi,
            n_max,
            divergence_cap: 1e12,
        })
    }

    pub fn describe(&self) -> String {
        format!(
            "{} rho samples in [{:e}, {:e}], eps_pi {:e}, n <= {}, divergence cap {:e}",
            self.rho_samples.len(),
            self.rho_samples.iter().copied().fold(f64::INFINITY, f64::min),
            self.rho_samples.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            self.eps_pi,
            self.n_max,
            self.divergence_cap
        )
    }
}

impl Default for PiProbe {
    /// 13 log-spaced samples in `[1e-3, 1e3]`, `eps_pi = 1e-6`, `n_max = 200`.
    fn default() -> Self {
        let samples = (0..13).map(|i| 10f64.powf(-3.0 + 0.5 * i as f64)).collect();
        PiProbe::new(samples, 1e-6, 200).expect("default probe is valid")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiWitness {
    pub rho: f64,
    /// Iterations performed before the orbit was abandoned.
    pub n: usize,
    /// Last iterate reached.
    pub value: f64,
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiVerdict {
    pub member: bool,
    pub witness: Option<PiWitness>,
    pub probe: PiProbe,
}

/// A single-valued self-map of `R^dim`.
#[derive(Clone)]
pub enum SingleMap {
    /// `u ↦ M u + b`, with `M` stored row-major.
    Affine {
        dim: usize,
        matrix: Vec<f64>,
        offset: Vec<f64>,
    },
    Custom {
        dim: usize,
        name: String,
        f: Arc<PointFn>,
    },
}

impl fmt::Debug for SingleMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SingleMap::Affine {
                matrix, offset, ..
            } => write!(f, "Affine(M={matrix:?}, b={offset:?})"),
            SingleMap::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

impl SingleMap {
    pub fn affine(dim: usize, matrix: Vec<f64>, offset: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        if matrix.len() != dim * dim {
            return Err(Error::Dimension {
                expected: dim * dim,
                got: matrix.len(),
            });
        }
        if offset.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: offset.len(),
            });
        }
        if !matrix.iter().chain(&offset).all(|c| c.is_finite()) {
            return Err(Error::NonFinite("affine map coefficients".into()));
        }
        Ok(SingleMap::Affine {
            dim,
            matrix,
            offset,
        })
    }

    /// `x ↦ scale·x + shift` on the real line.
    pub fn scalar(scale: f64, shift: f64) -> Result<Self> {
        Self::affine(1, vec![scale], vec![shift])
    }

    pub fn custom<F>(dim: usize, name: impl Into<String>, f: F) -> Self
    where
        F: Fn(&Point) -> Point + Send + Sync + 'static,
    {
        SingleMap::Custom {
            dim,
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SingleMap::Affine { dim, .. } | SingleMap::Custom { dim, .. } => *dim,
        }
    }

    /// Evaluates the map, rejecting non-finite images.
    pub fn apply(&self, u: &Point) -> Result<Point> {
        u.ensure_dim(self.dim())?;
        let image = match self {
            SingleMap::Affine {
                dim,
                matrix,
                offset,
            } => Point::new(
                matrix
                    .chunks_exact(*dim)
                    .zip(offset)
                    .map(|(row, b)| row.iter().zip(u.coords()).map(|(m, x)| m * x).sum::<f64>() + b)
                    .collect(),
            ),
            SingleMap::Custom { f, .. } => f(u),
        };
        image.ensure_dim(self.dim())?;
        if image.is_finite() {
            Ok(image)
        } else {
            Err(Error::NonFinite(format!("image of {u} is {image}")))
        }
    }
}

/// A multi-valued map whose image is the set of branch images.
#[derive(Debug, Clone)]
pub struct MultiMap {
    branches: Vec<SingleMap>,
}

/// `S(u)` together with, for each point, the first branch that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiImage {
    pub set: FiniteCompactSet,
    pub branch_of: Vec<usize>,
}

impl MultiMap {
    pub fn new(branches: Vec<SingleMap>) -> Result<Self> {
        let Some(first) = branches.first() else {
            return Err(Error::Config("a multimap needs at least one branch".into()));
        };
        let dim = first.dim();
        for b in &branches {
            if b.dim() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: b.dim(),
                });
            }
        }
        Ok(MultiMap { branches })
    }

    pub fn branches(&self) -> &[SingleMap] {
        &self.branches
    }

    pub fn dim(&self) -> usize {
        self.branches[0].dim()
    }

    pub fn image(&self, u: &Point) -> Result<MultiImage> {
        let images = self
            .branches
            .iter()
            .map(|b| b.apply(u))
            .collect::<Result<Vec<_>>>()?;
        let (set, branch_of) = FiniteCompactSet::with_origins(images)?;
        Ok(MultiImage { set, branch_of })
    }
}

/// How sample pairs are drawn for a verification run.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingProtocol {
    pub pair_samples: usize,
    pub rho_grid: Vec<f64>,
    pub seed: u64,
    pub bbox: BoundingBox,
}

impl SamplingProtocol {
    pub fn new(pair_samples: usize, rho_grid: Vec<f64>, seed: u64, bbox: BoundingBox) -> Result<Self> {
        if pair_samples == 0 {
            return Err(Error::Config("pair_samples must be at least 1".into()));
        }
        if rho_grid.is_empty() {
            return Err(Error::Config("rho grid must be nonempty".into()));
        }
        for &rho in &rho_grid {
            check_positive("rho", rho)?;
        }
        Ok(SamplingProtocol {
            pair_samples,
            rho_grid,
            seed,
            bbox,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn describe(&self) -> String {
        format!(
            "{} pairs, seed {}, box [{}, {}], rho grid {:?}",
            self.pair_samples, self.seed, self.bbox.lo, self.bbox.hi, self.rho_grid
        )
    }

    /// Visits `(index, u, v)` for every sample in draw order.
    fn for_each_pair(&self, dim: usize, mut visit: impl FnMut(usize, &Point, &Point) -> Result<()>) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for i in 0..self.pair_samples {
            let u = self.bbox.sample(&mut rng, dim);
            let v = self.bbox.sample(&mut rng, dim);
            visit(i, &u, &v)?;
        }
        Ok(())
    }
}

impl Default for SamplingProtocol {
    fn default() -> Self {
        SamplingProtocol {
            pair_samples: 1000,
            rho_grid: vec![0.01, 0.1, 1.0, 10.0, 100.0],
            seed: 0,
            bbox: BoundingBox::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionCounterexample {
    pub sample_index: usize,
    pub u: Point,
    pub v: Point,
    pub rho: f64,
    /// The side that should dominate (`Θ(fu, fv, ζ(ρ))` or `Υ(Su, Sv, ζ(ρ))`,
    /// or `ζ(ρ)·d(u, v)` for the metric condition).
    pub lhs: f64,
    pub rhs: f64,
}

impl fmt::Display for ContractionCounterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "sample {}: u={}, v={}, rho={}, lhs={}, rhs={}",
            self.sample_index, self.u, self.v, self.rho, self.lhs, self.rhs
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub condition: &'static str,
    pub protocol: SamplingProtocol,
    pub checked: usize,
    /// Smallest `lhs - rhs` seen (scaled for the metric condition).
    pub worst_margin: f64,
    pub counterexample: Option<ContractionCounterexample>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }

    fn run(
        condition: &'static str,
        protocol: &SamplingProtocol,
        dim: usize,
        mut sides: impl FnMut(&Point, &Point, f64) -> Result<(f64, f64)>,
        margin: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let mut report = VerificationReport {
            condition,
            protocol: protocol.clone(),
            checked: 0,
            worst_margin: f64::INFINITY,
            counterexample: None,
        };
        protocol.for_each_pair(dim, |i, u, v| {
            for &rho in &protocol.rho_grid {
                let (lhs, rhs) = sides(u, v, rho)?;
                let m = margin(lhs, rhs);
                report.checked += 1;
                report.worst_margin = report.worst_margin.min(m);
                if m < -CHECK_TOLERANCE && report.counterexample.is_none() {
                    report.counterexample = Some(ContractionCounterexample {
                        sample_index: i,
                        u: u.clone(),
                        v: v.clone(),
                        rho,
                        lhs,
                        rhs,
                    });
                }
            }
            Ok(())
        })?;
        Ok(report)
    }
}

fn ensure_map_dim(fm: &FuzzyMetric, dim: usize) -> Result<()> {
    if fm.dim() == dim {
        Ok(())
    } else {
        Err(Error::Dimension {
            expected: fm.dim(),
            got: dim,
        })
    }
}

/// Checks `Θ(fu, fv, ζ(ρ)) >= Θ(u, v, ρ)` on the sampled pairs.
pub fn verify_single_contraction(
    fm: &FuzzyMetric,
    f: &SingleMap,
    zeta: &ZetaFn,
    protocol: &SamplingProtocol,
) -> Result<VerificationReport> {
    ensure_map_dim(fm, f.dim())?;
    VerificationReport::run(
        "single-valued zeta-contraction",
        protocol,
        fm.dim(),
        |u, v, rho| {
            let (fu, fv) = (f.apply(u)?, f.apply(v)?);
            Ok((fm.theta(&fu, &fv, zeta.apply(rho)?), fm.theta(u, v, rho)))
        },
        |lhs, rhs| lhs - rhs,
    )
}

/// Checks `Υ(Su, Sv, ζ(ρ)) >= Θ(u, v, ρ)` on the sampled pairs.
pub fn verify_multi_contraction(
    fm: &FuzzyMetric,
    s: &MultiMap,
    zeta: &ZetaFn,
    protocol: &SamplingProtocol,
) -> Result<VerificationReport> {
    ensure_map_dim(fm, s.dim())?;
    VerificationReport::run(
        "multi-valued zeta-contraction",
        protocol,
        fm.dim(),
        |u, v, rho| {
            let (su, sv) = (s.image(u)?, s.image(v)?);
            Ok((
                hausdorff_unchecked(fm, &su.set, &sv.set, zeta.apply(rho)?),
                fm.theta(u, v, rho),
            ))
        },
        |lhs, rhs| lhs - rhs,
    )
}

/// Checks the ordinary-metric condition `ρ·d(fu, fv) <= ζ(ρ)·d(u, v)`.
///
/// Here `lhs = ζ(ρ)·d(u, v)` and `rhs = ρ·d(fu, fv)`, so a violation is again
/// `lhs < rhs`. The tolerance is relative to `max(1, rhs)`.
pub fn verify_metric_condition(
    space: &PointSpace,
    f: &SingleMap,
    zeta: &ZetaFn,
    protocol: &SamplingProtocol,
) -> Result<VerificationReport> {
    if space.metric().is_none() {
        return Err(Error::Config("point space has no base metric".into()));
    }
    if space.dim() != f.dim() {
        return Err(Error::Dimension {
            expected: space.dim(),
            got: f.dim(),
        });
    }
    VerificationReport::run(
        "metric condition rho*d(fu,fv) <= zeta(rho)*d(u,v)",
        protocol,
        space.dim(),
        |u, v, rho| {
            let (fu, fv) = (f.apply(u)?, f.apply(v)?);
            Ok((
                zeta.apply(rho)? * space.distance(u, v)?,
                rho * space.distance(&fu, &fv)?,
            ))
        },
        |lhs, rhs| (lhs - rhs) / rhs.abs().max(1.0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> FuzzyMetric {
        FuzzyMetric::standard(PointSpace::euclidean(1)).unwrap()
    }

    fn protocol() -> SamplingProtocol {
        SamplingProtocol {
            pair_samples: 200,
            ..SamplingProtocol::default()
        }
    }

    #[test]
    fn zeta_values() {
        let half = ZetaFn::linear(0.5).unwrap();
        assert_eq!(half.apply(2.0).unwrap(), 1.0);
        assert_eq!(half.apply(1e-9).unwrap(), 5e-10);
        let square = ZetaFn::custom("square", |r| r * r);
        assert_eq!(square.apply(3.0).unwrap(), 9.0);
        assert!(half.apply(0.0).is_err());
        assert!(ZetaFn::linear(0.0).is_err());
        let bad = ZetaFn::custom("negative", |r| -r);
        assert!(matches!(bad.apply(1.0), Err(Error::Range(_))));
    }

    #[test]
    fn pi_probe_linear() {
        let probe = PiProbe::default();
        assert_eq!(probe.rho_samples.len(), 13);
        assert!(ZetaFn::linear(0.5).unwrap().probe_pi_membership(&probe).unwrap().member);
        let identity = ZetaFn::linear(1.0).unwrap().probe_pi_membership(&probe).unwrap();
        assert!(!identity.member);
        assert!(!identity.witness.unwrap().diverged);
    }

    #[test]
    fn pi_probe_square_diverges() {
        let probe = PiProbe::new(vec![2.0], 1e-6, 200).unwrap();
        let v = ZetaFn::custom("square", |r| r * r)
            .probe_pi_membership(&probe)
            .unwrap();
        let w = v.witness.unwrap();
        assert_eq!(w.rho, 2.0);
        assert!(w.diverged);
        // 2, 4, 16, 256, 65536, 2^32, 2^64 > 1e12 after six squarings
        assert_eq!(w.n, 6);
    }

    #[test]
    fn affine_apply_and_validation() {
        let f = SingleMap::affine(2, vec![0.5, 0.0, 0.0, 0.25], vec![1.0, 1.0]).unwrap();
        assert_eq!(f.apply(&Point::from([2.0, 4.0])).unwrap(), Point::from([2.0, 2.0]));
        assert!(SingleMap::affine(1, vec![0.5, 0.1], vec![0.0]).is_err());
        assert!(SingleMap::affine(2, vec![1.0; 4], vec![0.0]).is_err());
        let blowup = SingleMap::custom(1, "blowup", |_| Point::from(f64::INFINITY));
        assert!(matches!(blowup.apply(&Point::from(1.0)), Err(Error::NonFinite(_))));
    }

    #[test]
    fn multimap_dedups_images() {
        let s = MultiMap::new(vec![
            SingleMap::scalar(0.5, 0.0).unwrap(),
            SingleMap::scalar(0.5, 0.5).unwrap(),
            SingleMap::scalar(0.0, 0.0).unwrap(),
        ])
        .unwrap();
        let img = s.image(&Point::from(0.0)).unwrap();
        assert_eq!(img.set.len(), 2);
        assert_eq!(img.branch_of, vec![0, 1]);
        assert!(MultiMap::new(vec![]).is_err());
    }

    #[test]
    fn halving_passes_with_equality() {
        let report = verify_single_contraction(
            &line(),
            &SingleMap::scalar(0.5, 0.0).unwrap(),
            &ZetaFn::linear(0.5).unwrap(),
            &protocol(),
        )
        .unwrap();
        assert!(report.passed());
        assert_eq!(report.checked, 1000);
        assert!(report.worst_margin.abs() <= 1e-15);
    }

    #[test]
    fn doubling_fails() {
        let report = verify_single_contraction(
            &line(),
            &SingleMap::scalar(2.0, 0.0).unwrap(),
            &ZetaFn::linear(0.5).unwrap(),
            &protocol(),
        )
        .unwrap();
        let cx = report.counterexample.unwrap();
        assert_eq!(cx.sample_index, 0);
        assert!(cx.lhs < cx.rhs);
    }

    #[test]
    fn multi_examples() {
        let fm = line();
        let zeta = ZetaFn::linear(0.6).unwrap();
        let s = MultiMap::new(vec![
            SingleMap::scalar(1.0 / 3.0, 0.0).unwrap(),
            SingleMap::scalar(0.5, 1.0).unwrap(),
        ])
        .unwrap();
        assert!(verify_multi_contraction(&fm, &s, &zeta, &protocol()).unwrap().passed());
        let grow = MultiMap::new(vec![SingleMap::scalar(2.0, 0.0).unwrap()]).unwrap();
        let r = verify_multi_contraction(&fm, &grow, &ZetaFn::linear(0.9).unwrap(), &protocol()).unwrap();
        assert!(!r.passed());
    }

    #[test]
    fn metric_condition() {
        let space = PointSpace::euclidean(1);
        let zeta = ZetaFn::linear(0.5).unwrap();
        let ok = verify_metric_condition(&space, &SingleMap::scalar(0.5, 1.0).unwrap(), &zeta, &protocol());
        assert!(ok.unwrap().passed());
        let shift = verify_metric_condition(
            &space,
            &SingleMap::scalar(1.0, 1.0).unwrap(),
            &ZetaFn::linear(0.9).unwrap(),
            &protocol(),
        )
        .unwrap();
        assert!(!shift.passed());
        assert!(verify_metric_condition(&PointSpace::bare(1), &SingleMap::scalar(1.0, 0.0).unwrap(), &zeta, &protocol()).is_err());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let planar = SingleMap::affine(2, vec![0.5, 0.0, 0.0, 0.5], vec![0.0, 0.0]).unwrap();
        let r = verify_single_contraction(&line(), &planar, &ZetaFn::linear(0.5).unwrap(), &protocol());
        assert!(matches!(r, Err(Error::Dimension { .. })));
    }
}
