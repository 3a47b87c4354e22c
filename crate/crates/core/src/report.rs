//! Structured pass/fail records for the verification suites, with a
//! deterministic machine-readable serialization. Timing lives in a
//! separate optional section so the main payload is byte-stable.

use std::fmt;

use serde::Serialize;

/// Schema version of the machine-readable report document.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    /// The check asserted a condition and it held.
    Pass,
    /// The check asserted a condition and it failed.
    Fail,
    /// The check computed and recorded a value without asserting.
    Recorded,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckStatus::Pass => write!(f, "pass"),
            CheckStatus::Fail => write!(f, "FAIL"),
            CheckStatus::Recorded => write!(f, "recorded"),
        }
    }
}

/// One verification check: identifier, human description, outcome and a
/// residual summary (stored term count plus the largest term magnitude at
/// a fixed probe point; both zero for an exactly-zero residual).
#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub id: String,
    pub description: String,
    pub status: CheckStatus,
    pub residual_terms: usize,
    pub residual_max_at_probe: f64,
    #[serde(skip)]
    pub millis: u128,
}

impl CheckRecord {
    pub fn exact(
        id: &str,
        description: impl Into<String>,
        ok: bool,
        terms: usize,
        probe: f64,
    ) -> Self {
        Self {
            id: id.to_string(),
            description: description.into(),
            status: if ok {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            residual_terms: terms,
            residual_max_at_probe: probe,
            millis: 0,
        }
    }

    pub fn recorded(id: &str, description: impl Into<String>) -> Self {
        Self {
            id: id.to_string(),
            description: description.into(),
            status: CheckStatus::Recorded,
            residual_terms: 0,
            residual_max_at_probe: 0.0,
            millis: 0,
        }
    }
}

/// A suite of checks, ordered deterministically by id.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub suite: String,
    pub checks: Vec<CheckRecord>,
}

#[derive(Serialize)]
struct TimedDocument<'a> {
    schema_version: u32,
    suite: &'a str,
    checks: &'a [CheckRecord],
    timing_millis: Vec<(String, u128)>,
}

impl VerificationReport {
    pub fn new(suite: impl Into<String>) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            suite: suite.into(),
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, check: CheckRecord) {
        self.checks.push(check);
        self.checks.sort_by(|a, b| a.id.cmp(&b.id));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn find(&self, id: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.id == id)
    }

    /// Machine-readable JSON; byte-deterministic for fixed inputs. Timing
    /// is emitted only on request, in a section of its own.
    pub fn to_json(&self, include_timing: bool) -> String {
        if include_timing {
            let doc = TimedDocument {
                schema_version: self.schema_version,
                suite: &self.suite,
                checks: &self.checks,
                timing_millis: self
                    .checks
                    .iter()
                    .map(|c| (c.id.clone(), c.millis))
                    .collect(),
            };
            serde_json::to_string_pretty(&doc).expect("report serialization")
        } else {
            serde_json::to_string_pretty(self).expect("report serialization")
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("suite: {}\n", self.suite);
        for c in &self.checks {
            out.push_str(&format!(
                "  [{}] {} — {} (residual terms: {}, max at probe: {:.3e})\n",
                c.status, c.id, c.description, c.residual_terms, c.residual_max_at_probe
            ));
        }
        out.push_str(&format!(
            "result: {}\n",
            if self.passed() {
                "ALL CHECKS PASSED"
            } else {
                "FAILURES PRESENT"
            }
        ));
        out
    }

    /// Ids of the failing checks (for error messages and exit codes).
    pub fn failing_ids(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| c.status == CheckStatus::Fail)
            .map(|c| c.id.as_str())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_and_pass_logic() {
        let mut r = VerificationReport::new("demo");
        r.push(CheckRecord::exact("02.second", "b", true, 0, 0.0));
        r.push(CheckRecord::exact("01.first", "a", true, 0, 0.0));
        assert_eq!(r.checks[0].id, "01.first");
        assert!(r.passed());
        r.push(CheckRecord::exact("03.bad", "c", false, 4, 1.5));
        assert!(!r.passed());
        assert_eq!(r.failing_ids(), vec!["03.bad"]);
    }

    #[test]
    fn json_is_deterministic_and_timing_is_optional() {
        let mut r = VerificationReport::new("demo");
        let mut c = CheckRecord::exact("01.x", "x", true, 0, 0.0);
        c.millis = 1234;
        r.push(c);
        let a = r.to_json(false);
        let b = r.to_json(false);
        assert_eq!(a, b);
        assert!(!a.contains("millis"));
        assert!(r.to_json(true).contains("timing_millis"));
    }
}
