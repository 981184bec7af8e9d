//! The Hausdorff fuzzy metric on finite point sets.
//!
//! For finite sets every supremum and infimum in the definition is attained,
//! so the point-to-set value is an exact maximum with a witness and
//! `Υ(A, B, ρ)` is an exact min-of-max.

use crate::error::check_positive;
use crate::fuzzy_metric::FuzzyMetric;
use crate::{Error, Point, Result};

/// A nonempty finite set of points with no exact duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteCompactSet {
    points: Vec<Point>,
}

impl FiniteCompactSet {
    /// Builds a set, dropping exact duplicates while keeping first-seen order.
    pub fn new(points: Vec<Point>) -> Result<Self> {
        Self::with_origins(points).map(|(set, _)| set)
    }

    /// Like [`new`](Self::new), also returning for each kept point the index
    /// of the input it came from.
    pub fn with_origins(points: Vec<Point>) -> Result<(Self, Vec<usize>)> {
        let Some(first) = points.first() else {
            return Err(Error::Config("a compact set must be nonempty".into()));
        };
        let dim = first.dim();
        let mut kept: Vec<Point> = Vec::with_capacity(points.len());
        let mut origins = Vec::with_capacity(points.len());
        for (i, p) in points.into_iter().enumerate() {
            p.ensure_dim(dim)?;
            if !p.is_finite() {
                return Err(Error::NonFinite(format!("set point {p}")));
            }
            if !kept.contains(&p) {
                kept.push(p);
                origins.push(i);
            }
        }
        Ok((FiniteCompactSet { points: kept }, origins))
    }

    pub fn singleton(p: Point) -> Result<Self> {
        Self::new(vec![p])
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.points.contains(p)
    }
}

/// The attaining point of a point-to-set value.
#[derive(Debug, Clone, PartialEq)]
pub struct Attained<'a> {
    pub value: f64,
    pub index: usize,
    pub witness: &'a Point,
}

fn check_args(fm: &FuzzyMetric, set: &FiniteCompactSet, rho: f64) -> Result<()> {
    check_positive("rho", rho)?;
    if set.dim() != fm.dim() {
        return Err(Error::Dimension {
            expected: fm.dim(),
            got: set.dim(),
        });
    }
    Ok(())
}

/// `Θ(u, B, ρ) = max_{v ∈ B} Θ(u, v, ρ)` with the lowest-index maximiser.
pub fn point_to_set<'a>(
    fm: &FuzzyMetric,
    u: &Point,
    set: &'a FiniteCompactSet,
    rho: f64,
) -> Result<Attained<'a>> {
    check_args(fm, set, rho)?;
    u.ensure_dim(fm.dim())?;
    Ok(point_to_set_unchecked(fm, u, set, rho))
}

pub(crate) fn point_to_set_unchecked<'a>(
    fm: &FuzzyMetric,
    u: &Point,
    set: &'a FiniteCompactSet,
    rho: f64,
) -> Attained<'a> {
    let mut best = Attained {
        value: fm.theta(u, &set.points[0], rho),
        index: 0,
        witness: &set.points[0],
    };
    for (i, v) in set.points.iter().enumerate().skip(1) {
        let value = fm.theta(u, v, rho);
        if value > best.value {
            best = Attained {
                value,
                index: i,
                witness: v,
            };
        }
    }
    best
}

/// `min_{u ∈ from} Θ(u, to, ρ)`: the directed term of the Hausdorff value.
fn directed(fm: &FuzzyMetric, from: &FiniteCompactSet, to: &FiniteCompactSet, rho: f64) -> f64 {
    from.points
        .iter()
        .map(|u| point_to_set_unchecked(fm, u, to, rho).value)
        .fold(f64::INFINITY, f64::min)
}

/// `Υ(A, B, ρ)`, the smaller of the two directed min-of-max terms.
pub fn hausdorff_eval(
    fm: &FuzzyMetric,
    a: &FiniteCompactSet,
    b: &FiniteCompactSet,
    rho: f64,
) -> Result<f64> {
    check_args(fm, a, rho)?;
    check_args(fm, b, rho)?;
    Ok(hausdorff_unchecked(fm, a, b, rho))
}

pub(crate) fn hausdorff_unchecked(
    fm: &FuzzyMetric,
    a: &FiniteCompactSet,
    b: &FiniteCompactSet,
    rho: f64,
) -> f64 {
    // Θ is symmetric, so inf_{v∈B} Θ(A, v, ρ) is the directed term from B to A.
    directed(fm, b, a, rho).min(directed(fm, a, b, rho))
}
