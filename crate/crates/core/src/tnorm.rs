//! Triangular norms.
//!
//! A t-norm is a commutative, associative binary operation on `[0, 1]` that is
//! monotone in each argument and has `1` as identity. Three closed forms are
//! built in; arbitrary evaluators can be wrapped with [`TNorm::custom`] and
//! audited with [`TNorm::check_axioms`].

use std::fmt;
use std::sync::Arc;

use crate::error::check_unit;
use crate::report::{AxiomCheck, AxiomReport, Counterexample};
use crate::{Error, Result, CHECK_TOLERANCE};

type BinaryFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TNormKind {
    Lukasiewicz,
    Product,
    Minimum,
    Custom,
}

impl TNormKind {
    pub fn name(self) -> &'static str {
        match self {
            TNormKind::Lukasiewicz => "lukasiewicz",
            TNormKind::Product => "product",
            TNormKind::Minimum => "minimum",
            TNormKind::Custom => "custom",
        }
    }
}

#[derive(Clone)]
pub enum TNorm {
    /// `max(a + b - 1, 0)`
    Lukasiewicz,
    /// `a * b`
    Product,
    /// `min(a, b)`
    Minimum,
    Custom { name: String, evaluator: Arc<BinaryFn> },
}

impl fmt::Debug for TNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TNorm::Custom { name, .. } => write!(f, "TNorm::Custom({name})"),
            other => write!(f, "TNorm::{}", other.kind().name()),
        }
    }
}

impl PartialEq for TNorm {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (TNorm::Custom { evaluator: a, .. }, TNorm::Custom { evaluator: b, .. }) => {
                Arc::ptr_eq(a, b)
            }
            (a, b) => a.kind() == b.kind(),
        }
    }
}

impl TNorm {
    /// Wraps an arbitrary evaluator. No axiom is verified here.
    pub fn custom<F>(name: impl Into<String>, evaluator: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        TNorm::Custom {
            name: name.into(),
            evaluator: Arc::new(evaluator),
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "lukasiewicz" => Some(TNorm::Lukasiewicz),
            "product" => Some(TNorm::Product),
            "minimum" => Some(TNorm::Minimum),
            _ => None,
        }
    }

    pub fn kind(&self) -> TNormKind {
        match self {
            TNorm::Lukasiewicz => TNormKind::Lukasiewicz,
            TNorm::Product => TNormKind::Product,
            TNorm::Minimum => TNormKind::Minimum,
            TNorm::Custom { .. } => TNormKind::Custom,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            TNorm::Custom { name, .. } => name,
            other => other.kind().name(),
        }
    }

    // Inputs are assumed to lie in [0, 1].
    fn eval(&self, a: f64, b: f64) -> f64 {
        match self {
            // The identity cases are split out so that `a + 1 - 1` rounding
            // cannot break `T(a, 1) = a`.
            TNorm::Lukasiewicz if a == 1.0 => b,
            TNorm::Lukasiewicz if b == 1.0 => a,
            TNorm::Lukasiewicz => (a + b - 1.0).max(0.0),
            TNorm::Product => a * b,
            TNorm::Minimum => a.min(b),
            TNorm::Custom { evaluator, .. } => evaluator(a, b),
        }
    }

    pub fn apply(&self, a: f64, b: f64) -> Result<f64> {
        check_unit("a", a)?;
        check_unit("b", b)?;
        Ok(self.eval(a, b))
    }

    /// Left fold `T(T(..T(v1, v2)..), vn)`; the empty fold is `1`.
    pub fn fold(&self, values: &[f64]) -> Result<f64> {
        for &v in values {
            check_unit("value", v)?;
        }
        Ok(match values.split_first() {
            None => 1.0,
            Some((&first, rest)) => rest.iter().fold(first, |acc, &v| self.eval(acc, v)),
        })
    }

    /// Iterated power: `T^0(a) = 1`, `T^n(a) = T(T^{n-1}(a), a)`.
    pub fn power(&self, a: f64, n: usize) -> Result<f64> {
        check_unit("a", a)?;
        Ok(self.power_unchecked(a, n))
    }

    fn power_unchecked(&self, a: f64, n: usize) -> f64 {
        if n == 0 {
            return 1.0;
        }
        (1..n).fold(a, |acc, _| self.eval(acc, a))
    }

    /// Checks the t-norm axioms on the grid `{i / resolution}`.
    ///
    /// Monotonicity is checked in the non-strict sense. Equalities are
    /// tested to [`CHECK_TOLERANCE`].
    pub fn check_axioms(&self, resolution: usize) -> Result<AxiomReport> {
        if resolution < 2 {
            return Err(Error::Config(format!(
                "grid resolution must be at least 2, got {resolution}"
            )));
        }
        let grid: Vec<f64> = (0..=resolution)
            .map(|i| i as f64 / resolution as f64)
            .collect();
        let tol = CHECK_TOLERANCE;
        let cx = |detail: &str, values: &[f64]| Counterexample {
            values: values.to_vec(),
            detail: detail.to_string(),
        };

        let mut range = AxiomCheck::new("range");
        let mut identity = AxiomCheck::new("identity");
        let mut commutativity = AxiomCheck::new("commutativity");
        let mut associativity = AxiomCheck::new("associativity");
        let mut monotonicity = AxiomCheck::new("monotonicity");
        let mut bounded = AxiomCheck::new("bounded-by-min");

        for &a in &grid {
            let right = self.eval(a, 1.0);
            let left = self.eval(1.0, a);
            identity.record(
                (right - a).abs() <= tol && (left - a).abs() <= tol,
                || cx("(a, T(a,1), T(1,a))", &[a, right, left]),
            );
            for (j, &b) in grid.iter().enumerate() {
                let ab = self.eval(a, b);
                let ba = self.eval(b, a);
                range.record((0.0..=1.0).contains(&ab), || cx("(a, b, T(a,b))", &[a, b, ab]));
                commutativity.record((ab - ba).abs() <= tol, || {
                    cx("(a, b, T(a,b), T(b,a))", &[a, b, ab, ba])
                });
                bounded.record(ab <= a.min(b) + tol, || cx("(a, b, T(a,b))", &[a, b, ab]));
                if let Some(&next) = grid.get(j + 1) {
                    let a_next = self.eval(a, next);
                    let next_a = self.eval(next, a);
                    monotonicity.record(ab <= a_next + tol && ba <= next_a + tol, || {
                        cx("(a, b, b', T(a,b), T(a,b'))", &[a, b, next, ab, a_next])
                    });
                }
                for &c in &grid {
                    let lhs = self.eval(a, self.eval(b, c));
                    let rhs = self.eval(ab, c);
                    associativity.record((lhs - rhs).abs() <= tol, || {
                        cx("(a, b, c, T(a,T(b,c)), T(T(a,b),c))", &[a, b, c, lhs, rhs])
                    });
                }
            }
        }

        Ok(AxiomReport {
            subject: format!("t-norm {}", self.name()),
            protocol: format!("uniform grid i/{resolution}, tolerance {tol:e}"),
            checks: vec![
                range,
                identity,
                commutativity,
                associativity,
                monotonicity,
                bounded,
            ],
        })
    }

    /// Bounded search for a falsification of the H-type property.
    pub fn probe_h_type(&self, probe: &HTypeProbe) -> HTypeVerdict {
        let mut accepted_lambda = Vec::with_capacity(probe.epsilons.len());
        let mut witness = None;
        for &eps in &probe.epsilons {
            let threshold = 1.0 - eps;
            let found = probe
                .lambdas
                .iter()
                .copied()
                .find(|&lambda| self.first_drop(probe, lambda, threshold).is_none());
            accepted_lambda.push(found);
            if found.is_none() && witness.is_none() {
                // The smallest λ failed too; its failing ρ exceeds 1 - λ for every λ tried.
                let lambda_min = probe.lambdas.iter().copied().fold(f64::INFINITY, f64::min);
                let (rho, n, value) = self
                    .first_drop(probe, lambda_min, threshold)
                    .expect("every lambda failed");
                witness = Some(HTypeWitness {
                    n,
                    rho,
                    eps,
                    value,
                });
            }
        }
        HTypeVerdict {
            holds: witness.is_none(),
            witness,
            accepted_lambda,
            probe: probe.clone(),
        }
    }

    /// First `(ρ, n, T^n(ρ))` with `ρ > 1 - λ` and `T^n(ρ) <= threshold`.
    fn first_drop(&self, probe: &HTypeProbe, lambda: f64, threshold: f64) -> Option<(f64, usize, f64)> {
        for &frac in &probe.rho_fractions {
            let rho = 1.0 - lambda * frac;
            let mut value = rho;
            for n in 1..=probe.n_max {
                if n > 1 {
                    value = self.eval(value, rho);
                }
                if value <= threshold {
                    return Some((rho, n, value));
                }
            }
        }
        None
    }
}

/// Search bounds for [`TNorm::probe_h_type`].
#[derive(Debug, Clone, PartialEq)]
pub struct HTypeProbe {
    pub epsilons: Vec<f64>,
    /// Candidate λ values, each in `(0, 1)`.
    pub lambdas: Vec<f64>,
    /// For a given λ the probed points are `ρ = 1 - λ·f` for each fraction `f`.
    pub rho_fractions: Vec<f64>,
    pub n_max: usize,
}

impl HTypeProbe {
    pub fn new(epsilons: Vec<f64>, lambdas: Vec<f64>, n_max: usize) -> Result<Self> {
        let open_unit = |v: &f64| *v > 0.0 && *v < 1.0;
        if epsilons.is_empty() || !epsilons.iter().all(open_unit) {
            return Err(Error::Config("epsilons must be a nonempty list in (0, 1)".into()));
        }
        if lambdas.is_empty() || !lambdas.iter().all(open_unit) {
            return Err(Error::Config("lambda grid must be a nonempty list in (0, 1)".into()));
        }
        if n_max == 0 {
            return Err(Error::Config("n_max must be at least 1".into()));
        }
        Ok(HTypeProbe {
            epsilons,
            lambdas,
            rho_fractions: vec![0.999, 0.75, 0.5, 0.25, 0.001],
            n_max,
        })
    }

    pub fn describe(&self) -> String {
        let lo = self.lambdas.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.lambdas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        format!(
            "eps {:?}, {} lambdas in [{lo:e}, {hi}], rho = 1 - lambda*f for f in {:?}, n <= {}",
            self.epsilons,
            self.lambdas.len(),
            self.rho_fractions,
            self.n_max
        )
    }
}

impl Default for HTypeProbe {
    /// ε ∈ {0.5, 0.1, 0.01}, 20 log-spaced λ in `[1e-4, 0.5]`, `n_max = 200`.
    fn default() -> Self {
        let (lo, hi) = (1e-4f64.ln(), 0.5f64.ln());
        let lambdas = (0..20)
            .map(|i| (lo + (hi - lo) * i as f64 / 19.0).exp())
            .collect();
        HTypeProbe::new(vec![0.5, 0.1, 0.01], lambdas, 200).expect("default probe is valid")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HTypeWitness {
    pub n: usize,
    pub rho: f64,
    pub eps: f64,
    /// `T^n(ρ)`, at most `1 - eps`.
    pub value: f64,
}

/// Outcome of [`TNorm::probe_h_type`]. `holds = true` only means no
/// falsification was found within the probe bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct HTypeVerdict {
    pub holds: bool,
    pub witness: Option<HTypeWitness>,
    /// For each ε, the first λ that survived the search.
    pub accepted_lambda: Vec<Option<f64>>,
    pub probe: HTypeProbe,
}

#[cfg(test)]
mod tests {
    use super::*;

    const BUILTINS: [TNorm; 3] = [TNorm::Lukasiewicz, TNorm::Product, TNorm::Minimum];

    #[test]
    fn closed_forms() {
        assert_eq!(TNorm::Product.apply(0.5, 0.4).unwrap(), 0.2);
        assert_eq!(TNorm::Lukasiewicz.apply(0.5, 0.4).unwrap(), 0.0);
        assert_eq!(TNorm::Minimum.apply(0.5, 0.4).unwrap(), 0.4);
    }

    #[test]
    fn identity_and_annihilator_are_exact() {
        for t in &BUILTINS {
            for i in 0..=100 {
                let a = i as f64 / 100.0;
                assert_eq!(t.apply(a, 1.0).unwrap(), a, "{t:?} T(a,1)");
                assert_eq!(t.apply(1.0, a).unwrap(), a, "{t:?} T(1,a)");
                assert_eq!(t.apply(a, 0.0).unwrap(), 0.0, "{t:?} T(a,0)");
            }
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(matches!(
            TNorm::Product.apply(1.5, 0.2),
            Err(Error::Domain { .. })
        ));
        assert!(TNorm::Minimum.apply(0.2, -0.1).is_err());
        assert!(TNorm::Minimum.apply(f64::NAN, 0.1).is_err());
        assert!(TNorm::Product.fold(&[0.5, 2.0]).is_err());
        assert!(TNorm::Product.power(-1.0, 3).is_err());
    }

    #[test]
    fn fold_examples() {
        let l = TNorm::Lukasiewicz.fold(&[0.9, 0.9, 0.9]).unwrap();
        assert!((l - 0.7).abs() < 1e-12);
        assert_eq!(TNorm::Minimum.fold(&[0.3, 0.8, 0.5]).unwrap(), 0.3);
        for t in &BUILTINS {
            assert_eq!(t.fold(&[]).unwrap(), 1.0);
        }
    }

    #[test]
    fn power_examples() {
        for t in &BUILTINS {
            assert_eq!(t.power(0.7, 0).unwrap(), 1.0);
        }
        assert_eq!(TNorm::Lukasiewicz.power(0.9, 10).unwrap(), 0.0);
        assert_eq!(TNorm::Minimum.power(0.7, 5).unwrap(), 0.7);
        assert!((TNorm::Product.power(0.5, 3).unwrap() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn builtins_pass_axioms() {
        for t in &BUILTINS {
            let report = t.check_axioms(50).unwrap();
            assert!(report.passed(), "{report}");
        }
    }

    #[test]
    fn averaging_is_not_associative() {
        let avg = TNorm::custom("average", |a, b| (a + b) / 2.0);
        let report = avg.check_axioms(10).unwrap();
        let assoc = report.check("associativity").unwrap();
        let cx = assoc.counterexample.as_ref().expect("witness");
        let (a, b, c) = (cx.values[0], cx.values[1], cx.values[2]);
        let lhs = (a + (b + c) / 2.0) / 2.0;
        let rhs = ((a + b) / 2.0 + c) / 2.0;
        assert!((lhs - rhs).abs() > 1e-12);
        assert!(report.check("commutativity").unwrap().passed());
    }

    #[test]
    fn resolution_must_be_at_least_two() {
        assert!(TNorm::Product.check_axioms(1).is_err());
    }

    #[test]
    fn h_type_probe_defaults() {
        let probe = HTypeProbe::default();
        assert_eq!(probe.lambdas.len(), 20);
        assert!(TNorm::Minimum.probe_h_type(&probe).holds);
        for t in [TNorm::Lukasiewicz, TNorm::Product] {
            let verdict = t.probe_h_type(&probe);
            assert!(!verdict.holds, "{t:?}");
            let w = verdict.witness.unwrap();
            assert!(w.value <= 1.0 - w.eps);
            assert_eq!(t.power(w.rho, w.n).unwrap(), w.value);
            for &lambda in &probe.lambdas {
                assert!(w.rho > 1.0 - lambda);
            }
        }
    }

    #[test]
    fn h_type_probe_validates_bounds() {
        assert!(HTypeProbe::new(vec![], vec![0.1], 5).is_err());
        assert!(HTypeProbe::new(vec![0.1], vec![1.0], 5).is_err());
        assert!(HTypeProbe::new(vec![0.1], vec![0.1], 0).is_err());
    }
}
