//! Outcome of a law check.

use std::fmt;

/// A single failed instance of a law.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Short law name, e.g. `"triangle"` or `"identity-weight"`.
    pub law: String,
    /// Indices identifying where the law failed (objects, morphisms, points).
    pub witness: Vec<usize>,
    pub lhs: f64,
    pub rhs: f64,
}

/// Result of running a law check. `passed()` holds exactly when no
/// violations were recorded.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LawReport {
    violations: Vec<Violation>,
    notes: Vec<String>,
}

impl LawReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    /// Informational remarks that do not affect `passed()`.
    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    pub fn violate(&mut self, law: &str, witness: Vec<usize>, lhs: f64, rhs: f64) {
        self.violations.push(Violation { law: law.to_string(), witness, lhs, rhs });
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    /// Appends every violation and note of `other`.
    pub fn merge(&mut self, other: LawReport) {
        self.violations.extend(other.violations);
        self.notes.extend(other.notes);
    }

    /// Violations recorded for one law.
    pub fn violations_of<'a>(&'a self, law: &'a str) -> impl Iterator<Item = &'a Violation> + 'a {
        self.violations.iter().filter(move |v| v.law == law)
    }

    pub fn has_violation(&self, law: &str) -> bool {
        self.violations_of(law).next().is_some()
    }
}

impl fmt::Display for LawReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            write!(f, "passed")?;
        } else {
            write!(f, "{} violation(s)", self.violations.len())?;
            for v in &self.violations {
                write!(f, "\n  {} at {:?}: {} vs {}", v.law, v.witness, v.lhs, v.rhs)?;
            }
        }
        for n in &self.notes {
            write!(f, "\n  note: {n}")?;
        }
        Ok(())
    }
}
