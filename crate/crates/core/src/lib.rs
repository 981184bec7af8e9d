//! Fixed-point machinery for George–Veeramani fuzzy metric spaces.
//!
//! The crate is layered bottom-up:
//!
//! - [`tnorm`]: triangular norms, their n-ary folds and iterated powers.
//! - [`fuzzy_metric`]: point spaces, fuzzy metrics and sequence classification.
//! - [`hausdorff`]: the Hausdorff fuzzy metric on finite point sets.
//! - [`contraction`]: ζ functions, mappings and sample-based contraction checks.
//! - [`solver`]: Picard orbits with convergence certificates.
//! - [`problem`], [`demo`], [`app`]: the problem-file format and command driver
//!   used by the `ffp` binary.

pub mod app;
pub mod contraction;
pub mod demo;
mod error;
pub mod fuzzy_metric;
pub mod hausdorff;
mod point;
pub mod problem;
pub mod report;
pub mod solver;
pub mod tnorm;

pub use error::{Error, Result};
pub use point::{BoundingBox, Point};

/// Absolute tolerance used for every floating-point axiom and inequality check.
pub const CHECK_TOLERANCE: f64 = 1e-12;
