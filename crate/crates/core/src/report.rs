//! Check records and the machine-readable run report.
//!
//! A [`CheckReport`] captures one verified identity: both sides, absolute
//! and relative error, the tolerance in force, and the verdict. A
//! [`RunReport`] aggregates suites of checks with a config echo and summary
//! counts. Everything outside the `timestamp` field is a pure function of
//! config and seed, so two runs diff byte-identically after dropping it.

use crate::scalar::{report_abs, Scalar};
use serde::Serialize;
use std::collections::BTreeMap;

/// Complex value as serialised in reports.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct Cx {
    pub re: f64,
    pub im: f64,
}

impl Cx {
    pub fn of<S: Scalar>(x: &S) -> Self {
        let c = x.to_c64();
        Cx { re: c.re, im: c.im }
    }
}

/// Pass criterion: `abs_err ≤ abs` or `rel_err ≤ rel`.
#[derive(Debug, Clone, Copy, Serialize, serde::Deserialize, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64) -> Self {
        Tolerance { rel, abs }
    }

    /// Exact equality demanded (used on the exact backend).
    pub fn exact() -> Self {
        Tolerance { rel: 0.0, abs: 0.0 }
    }
}

/// Record of a single verification.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub name: String,
    /// Which identity or contract the check exercises.
    pub identity: String,
    pub lhs: Cx,
    pub rhs: Cx,
    pub abs_err: f64,
    pub rel_err: f64,
    pub tol: Tolerance,
    pub pass: bool,
    pub skipped: bool,
    pub notes: String,
}

impl CheckReport {
    pub fn compare<S: Scalar>(
        name: impl Into<String>,
        identity: impl Into<String>,
        lhs: &S,
        rhs: &S,
        tol: Tolerance,
    ) -> Self {
        let diff = lhs.clone() - rhs.clone();
        let abs_err = report_abs(&diff);
        let denom = report_abs(lhs).max(report_abs(rhs));
        let rel_err = if denom > 0.0 { abs_err / denom } else { 0.0 };
        let pass = abs_err <= tol.abs || rel_err <= tol.rel;
        CheckReport {
            name: name.into(),
            identity: identity.into(),
            lhs: Cx::of(lhs),
            rhs: Cx::of(rhs),
            abs_err,
            rel_err,
            tol,
            pass,
            skipped: false,
            notes: String::new(),
        }
    }

    /// A check gated off by a precondition; counted separately, never a
    /// failure.
    pub fn skip(
        name: impl Into<String>,
        identity: impl Into<String>,
        reason: impl Into<String>,
    ) -> Self {
        CheckReport {
            name: name.into(),
            identity: identity.into(),
            lhs: Cx { re: 0.0, im: 0.0 },
            rhs: Cx { re: 0.0, im: 0.0 },
            abs_err: 0.0,
            rel_err: 0.0,
            tol: Tolerance::exact(),
            pass: true,
            skipped: true,
            notes: reason.into(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes = note.into();
        self
    }

    /// One-line console rendering.
    pub fn console_line(&self) -> String {
        if self.skipped {
            format!("[skip] {} :: {} ({})", self.name, self.identity, self.notes)
        } else if self.pass {
            format!(
                "[ ok ] {} :: {} (abs {:.3e}, rel {:.3e})",
                self.name, self.identity, self.abs_err, self.rel_err
            )
        } else {
            format!(
                "[FAIL] {} :: {} (abs {:.3e}, rel {:.3e}, lhs {:+.9e}{:+.9e}i, rhs {:+.9e}{:+.9e}i)",
                self.name,
                self.identity,
                self.abs_err,
                self.rel_err,
                self.lhs.re,
                self.lhs.im,
                self.rhs.re,
                self.rhs.im
            )
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub checks: Vec<CheckReport>,
}

#[derive(Debug, Clone, Serialize, Default, PartialEq, Eq)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

impl Summary {
    pub fn tally(suites: &[SuiteReport]) -> Self {
        let mut s = Summary::default();
        for suite in suites {
            for c in &suite.checks {
                s.total += 1;
                if c.skipped {
                    s.skipped += 1;
                } else if c.pass {
                    s.passed += 1;
                } else {
                    s.failed += 1;
                }
            }
        }
        s
    }
}

/// Volatile run metadata; the single field excluded from byte-for-byte
/// report comparisons.
#[derive(Debug, Clone, Serialize, Default)]
pub struct Timestamp {
    pub unix_ms: u128,
    pub wall_ms_total: u64,
    pub wall_ms_by_suite: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport<C: Serialize> {
    pub schema_version: u32,
    pub timestamp: Timestamp,
    pub config: C,
    pub suites: Vec<SuiteReport>,
    pub summary: Summary,
}

impl<C: Serialize> RunReport<C> {
    pub fn new(config: C, suites: Vec<SuiteReport>, timestamp: Timestamp) -> Self {
        let summary = Summary::tally(&suites);
        RunReport {
            schema_version: 1,
            timestamp,
            config,
            suites,
            summary,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialisation")
    }

    /// Serialisation with the volatile field zeroed, for determinism
    /// comparisons.
    pub fn to_json_without_timestamp(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serialisation");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("timestamp");
        }
        serde_json::to_string_pretty(&v).expect("report serialisation")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ExactC, F64C};

    #[test]
    fn exact_comparison_requires_exact_equality() {
        let tol = Tolerance::exact();
        let a = ExactC::from_ratio(1, 3);
        let ok = CheckReport::compare("t", "id", &a, &a, tol);
        assert!(ok.pass);
        assert_eq!(ok.abs_err, 0.0);
        let b = ExactC::from_ratio(1, 3) + ExactC::from_ratio(1, 1_000_000_000);
        let bad = CheckReport::compare("t", "id", &a, &b, tol);
        assert!(!bad.pass);
        assert!(bad.abs_err > 0.0);
    }

    #[test]
    fn float_comparison_uses_both_tolerances() {
        let tol = Tolerance::new(1e-6, 1e-9);
        let a = F64C::new(1.0, 0.0);
        let b = F64C::new(1.0 + 1e-8, 0.0);
        assert!(CheckReport::compare("t", "id", &a, &b, tol).pass);
        let c = F64C::new(1e-10, 0.0);
        let z = F64C::new(0.0, 0.0);
        assert!(CheckReport::compare("t", "id", &c, &z, tol).pass);
        let d = F64C::new(1.0 + 1e-3, 0.0);
        assert!(!CheckReport::compare("t", "id", &a, &d, tol).pass);
    }

    #[test]
    fn summary_counts_match_list() {
        let tol = Tolerance::new(1e-6, 1e-9);
        let suites = vec![SuiteReport {
            name: "s".into(),
            checks: vec![
                CheckReport::compare("a", "i", &F64C::new(1.0, 0.0), &F64C::new(1.0, 0.0), tol),
                CheckReport::compare("b", "i", &F64C::new(1.0, 0.0), &F64C::new(2.0, 0.0), tol),
                CheckReport::skip("c", "i", "gated"),
            ],
        }];
        let s = Summary::tally(&suites);
        assert_eq!(
            s,
            Summary {
                total: 3,
                passed: 1,
                failed: 1,
                skipped: 1
            }
        );
    }
}
