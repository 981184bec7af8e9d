//! Pass/fail reports shared by the axiom checkers.

use std::fmt;

/// The first input found to violate a checked property.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    /// Inputs and observed values, in the order named by `detail`.
    pub values: Vec<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxiomCheck {
    pub name: &'static str,
    pub evaluations: usize,
    pub counterexample: Option<Counterexample>,
}

impl AxiomCheck {
    pub(crate) fn new(name: &'static str) -> Self {
        AxiomCheck {
            name,
            evaluations: 0,
            counterexample: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }

    /// Records one evaluation; keeps only the first failure.
    pub(crate) fn record(&mut self, ok: bool, witness: impl FnOnce() -> Counterexample) {
        self.evaluations += 1;
        if !ok && self.counterexample.is_none() {
            self.counterexample = Some(witness());
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxiomReport {
    pub subject: String,
    pub protocol: String,
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(AxiomCheck::passed)
    }

    pub fn check(&self, name: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn first_failure(&self) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| !c.passed())
    }
}

impl fmt::Display for AxiomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} [{}]", self.subject, self.protocol)?;
        for c in &self.checks {
            match &c.counterexample {
                None => writeln!(f, "  {:<16} pass ({} evaluations)", c.name, c.evaluations)?,
                Some(cx) => writeln!(f, "  {:<16} FAIL {} {:?}", c.name, cx.detail, cx.values)?,
            }
        }
        Ok(())
    }
}
