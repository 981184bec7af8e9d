use std::fmt;
use std::ops::Deref;

use rand::Rng;

use crate::{Error, Result};

/// A point of a finite-dimensional real vector space.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Euclidean distance; both points must share a dimension.
    pub fn euclidean(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub(crate) fn ensure_dim(&self, dim: usize) -> Result<()> {
        if self.dim() == dim {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: dim,
                got: self.dim(),
            })
        }
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Point(coords)
    }
}

impl From<f64> for Point {
    fn from(x: f64) -> Self {
        Point(vec![x])
    }
}

impl<const N: usize> From<[f64; N]> for Point {
    fn from(coords: [f64; N]) -> Self {
        Point(coords.to_vec())
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// The cube `[lo, hi]^dim` that random sample points are drawn from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub lo: f64,
    pub hi: f64,
}

impl BoundingBox {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::Config(format!("invalid bounding box [{lo}, {hi}]")));
        }
        Ok(BoundingBox { lo, hi })
    }

    /// Draws one point uniformly from the box.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, dim: usize) -> Point {
        Point(
            (0..dim)
                .map(|_| {
                    if self.lo == self.hi {
                        self.lo
                    } else {
                        rng.gen_range(self.lo..=self.hi)
                    }
                })
                .collect(),
        )
    }
}

impl Default for BoundingBox {
    fn default() -> Self {
        BoundingBox {
            lo: -10.0,
            hi: 10.0,
        }
    }
}
