//! Check records and reports shared by the verification suites and the CLI.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub points: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, max_residual: f64, tolerance: f64) -> Self {
        CheckRecord {
            name: name.into(),
            max_residual,
            tolerance,
            passed: max_residual <= tolerance,
            points: 0,
            seed: 0,
            note: None,
        }
    }

    pub fn with_sampling(mut self, points: usize, seed: u64) -> Self {
        self.points = points;
        self.seed = seed;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// For checks whose pass condition is not `residual <= tolerance`.
    pub fn with_passed(mut self, passed: bool) -> Self {
        self.passed = passed;
        self
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ReportSummary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckRecord>,
    pub summary: ReportSummary,
}

impl VerificationReport {
    pub fn new() -> Self {
        VerificationReport::default()
    }

    pub fn push(&mut self, check: CheckRecord) {
        self.summary.total += 1;
        if check.passed {
            self.summary.passed += 1;
        } else {
            self.summary.failed += 1;
        }
        self.checks.push(check);
    }

    pub fn extend(&mut self, checks: impl IntoIterator<Item = CheckRecord>) {
        for c in checks {
            self.push(c);
        }
    }

    pub fn merge(&mut self, other: VerificationReport) {
        self.extend(other.checks);
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn max_residual(&self, name_prefix: &str) -> Option<f64> {
        self.checks
            .iter()
            .filter(|c| c.name.starts_with(name_prefix))
            .map(|c| c.max_residual)
            .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
    }
}
