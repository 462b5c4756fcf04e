//! Quantitative acceptance checks, one per suite. Each returns a
//! [`CriterionReport`] with the measured values and their limits.

mod criteria;
pub mod samples;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

use criteria::*;

/// A measured quantity and the bound it is held to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measurement {
    pub name: String,
    pub value: f64,
    /// Display form of the bound, e.g. `<= 0.02`. Informational entries have none.
    pub limit: Option<String>,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub suite: &'static str,
    pub passed: bool,
    pub measurements: Vec<Measurement>,
    pub notes: Vec<String>,
    pub seconds: f64,
}

impl CriterionReport {
    fn new(suite: Suite) -> Self {
        Self {
            id: suite.id(),
            suite: suite.name(),
            passed: true,
            measurements: Vec::new(),
            notes: Vec::new(),
            seconds: 0.0,
        }
    }

    fn at_most(&mut self, name: impl Into<String>, value: f64, limit: f64) {
        self.check(name, value, value <= limit, format!("<= {limit:.3e}"));
    }

    fn at_least(&mut self, name: impl Into<String>, value: f64, limit: f64) {
        self.check(name, value, value >= limit, format!(">= {limit:.3e}"));
    }

    fn within(&mut self, name: impl Into<String>, value: f64, lo: f64, hi: f64) {
        self.check(
            name,
            value,
            lo <= value && value <= hi,
            format!("in [{lo}, {hi}]"),
        );
    }

    fn check(&mut self, name: impl Into<String>, value: f64, ok: bool, limit: String) {
        let ok = ok && value.is_finite();
        self.passed &= ok;
        self.measurements.push(Measurement {
            name: name.into(),
            value,
            limit: Some(limit),
            ok,
        });
    }

    fn info(&mut self, name: impl Into<String>, value: f64) {
        self.measurements.push(Measurement {
            name: name.into(),
            value,
            limit: None,
            ok: true,
        });
    }

    fn fail_with(&mut self, err: &Error) {
        self.passed = false;
        self.notes.push(format!("error: {err}"));
    }

    /// One-line summary starting with `PASS` or `FAIL`.
    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let parts: Vec<String> = self
            .measurements
            .iter()
            .map(|m| match &m.limit {
                Some(l) => format!(
                    "{}={:.4e} ({l}){}",
                    m.name,
                    m.value,
                    if m.ok { "" } else { " !" }
                ),
                None => format!("{}={:.4e}", m.name, m.value),
            })
            .collect();
        format!(
            "{verdict} [{:>2}] {:<13} {} ({:.1}s)",
            self.id,
            self.suite,
            parts.join(", "),
            self.seconds
        )
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.line())?;
        for n in &self.notes {
            write!(f, "\n       {n}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Convolution,
    Peakon,
    Conservation,
    Constraint,
    Collision,
    Equivariance,
    Roundtrip,
    Sandwich,
    Equivalence,
    Discontinuity,
    Weak,
    Hyperelastic,
}

impl Suite {
    pub const ALL: [Suite; 12] = [
        Suite::Convolution,
        Suite::Peakon,
        Suite::Conservation,
        Suite::Constraint,
        Suite::Collision,
        Suite::Equivariance,
        Suite::Roundtrip,
        Suite::Sandwich,
        Suite::Equivalence,
        Suite::Discontinuity,
        Suite::Weak,
        Suite::Hyperelastic,
    ];

    pub fn id(self) -> u8 {
        Self::ALL.iter().position(|&s| s == self).expect("listed") as u8 + 1
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Convolution => "convolution",
            Suite::Peakon => "peakon",
            Suite::Conservation => "conservation",
            Suite::Constraint => "constraint",
            Suite::Collision => "collision",
            Suite::Equivariance => "equivariance",
            Suite::Roundtrip => "roundtrip",
            Suite::Sandwich => "sandwich",
            Suite::Equivalence => "equivalence",
            Suite::Discontinuity => "discontinuity",
            Suite::Weak => "weak",
            Suite::Hyperelastic => "hyperelastic",
        }
    }

    /// Run the suite; errors inside a check are reported as a failure.
    pub fn run(self, seed: u64) -> CriterionReport {
        let start = std::time::Instant::now();
        let mut report = CriterionReport::new(self);
        let outcome = match self {
            Suite::Convolution => convolution(&mut report, seed),
            Suite::Peakon => peakon(&mut report),
            Suite::Conservation => conservation(&mut report),
            Suite::Constraint => constraint(&mut report),
            Suite::Collision => collision(&mut report),
            Suite::Equivariance => equivariance(&mut report, seed),
            Suite::Roundtrip => roundtrip(&mut report, seed),
            Suite::Sandwich => sandwich(&mut report, seed),
            Suite::Equivalence => equivalence(&mut report, seed),
            Suite::Discontinuity => discontinuity(&mut report),
            Suite::Weak => weak(&mut report),
            Suite::Hyperelastic => hyperelastic(&mut report, seed),
        };
        if let Err(e) = outcome {
            report.fail_with(&e);
        }
        report.seconds = start.elapsed().as_secs_f64();
        report
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown suite '{s}'")))
    }
}

/// Default seed of the randomized suites.
pub const DEFAULT_SEED: u64 = 20_240_611;
