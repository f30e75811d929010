//! Pass/fail reports shared by every verifier.

use serde::{Deserialize, Serialize};

use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    NotRDisjoint,
    MeshExceeded,
    Uncovered,
    OutOfRange,
    EmptyMember,
    Schedule,
    NotInTarget,
    ExtraPoints,
    MissingWitness,
    NotDoubling,
    NoDoublingScale,
    Domination,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Family index inside a witness or step index inside a chain, when relevant.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<usize>,
    /// Offending member sets, by index within their family.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sets: Vec<usize>,
    /// Offending points, by label.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<String>,
    #[serde(with = "crate::rational::option", default, skip_serializing_if = "Option::is_none")]
    pub measured: Option<Rational>,
    #[serde(with = "crate::rational::option", default, skip_serializing_if = "Option::is_none")]
    pub required: Option<Rational>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Violation {
    pub fn new(kind: ViolationKind) -> Self {
        Self {
            kind,
            family: None,
            sets: Vec::new(),
            points: Vec::new(),
            measured: None,
            required: None,
            detail: String::new(),
        }
    }

    pub fn family(mut self, family: usize) -> Self {
        self.family = Some(family);
        self
    }

    pub fn sets(mut self, sets: Vec<usize>) -> Self {
        self.sets = sets;
        self
    }

    pub fn points(mut self, points: Vec<String>) -> Self {
        self.points = points;
        self
    }

    pub fn measured(mut self, value: Rational) -> Self {
        self.measured = Some(value);
        self
    }

    pub fn required(mut self, value: Rational) -> Self {
        self.required = Some(value);
        self
    }

    pub fn detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// The verdict is derived from the violation list, so the two cannot disagree.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerificationReport {
    violations: Vec<Violation>,
}

impl VerificationReport {
    pub fn pass() -> Self {
        Self::default()
    }

    pub fn from_violations(violations: Vec<Violation>) -> Self {
        Self { violations }
    }

    pub fn push(&mut self, violation: Violation) {
        self.violations.push(violation);
    }

    pub fn merge(&mut self, other: VerificationReport) {
        self.violations.extend(other.violations);
    }

    /// Tags every violation that has no family yet.
    pub fn in_family(mut self, family: usize) -> Self {
        for v in &mut self.violations {
            v.family.get_or_insert(family);
        }
        self
    }

    /// Prefixes every violation's detail with `context`.
    pub fn with_context(mut self, context: &str) -> Self {
        for v in &mut self.violations {
            v.detail = if v.detail.is_empty() {
                context.to_string()
            } else {
                format!("{context}: {}", v.detail)
            };
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn verdict(&self) -> Verdict {
        if self.passed() {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }
}

#[derive(Serialize, Deserialize)]
struct ReportRepr {
    verdict: Verdict,
    violations: Vec<Violation>,
}

impl Serialize for VerificationReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ReportRepr {
            verdict: self.verdict(),
            violations: self.violations.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for VerificationReport {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = ReportRepr::deserialize(d)?;
        let report = Self::from_violations(repr.violations);
        if report.verdict() != repr.verdict {
            return Err(serde::de::Error::custom("verdict disagrees with violation list"));
        }
        Ok(report)
    }
}
