//! Shared diagnostic and report types, with the stable JSON schema used
//! by the validator, coverage, classification, and simulation commands.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => f.write_str("error"),
            Severity::Warning => f.write_str("warning"),
        }
    }
}

/// A rule finding over a checked model.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RuleDiagnostic {
    pub severity: Severity,
    pub code: String,
    pub subjects: Vec<String>,
    pub message: String,
}

impl RuleDiagnostic {
    pub fn new(
        severity: Severity,
        code: impl Into<String>,
        subjects: Vec<String>,
        message: impl Into<String>,
    ) -> Self {
        RuleDiagnostic { severity, code: code.into(), subjects, message: message.into() }
    }

    /// Line format: `SEVERITY CODE subject: message`.
    pub fn to_line(&self) -> String {
        format!(
            "{} {} {}: {}",
            self.severity,
            self.code,
            self.subjects.join(","),
            self.message
        )
    }
}

/// A parse-time finding with a source position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceDiagnostic {
    pub severity: Severity,
    pub code: String,
    pub message: String,
    pub line: usize,
    pub column: usize,
}

impl SourceDiagnostic {
    pub fn error(code: &str, message: impl Into<String>, line: usize, column: usize) -> Self {
        SourceDiagnostic {
            severity: Severity::Error,
            code: code.into(),
            message: message.into(),
            line,
            column,
        }
    }

    pub fn to_line(&self) -> String {
        format!(
            "{} {} {}:{}: {}",
            self.severity, self.code, self.line, self.column, self.message
        )
    }
}

/// Stable ordering used everywhere diagnostics are emitted: by (code,
/// first subject).
pub fn sort_diagnostics(diags: &mut [RuleDiagnostic]) {
    diags.sort_by(|a, b| {
        (&a.code, a.subjects.first()).cmp(&(&b.code, b.subjects.first()))
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_format() {
        let d = RuleDiagnostic::new(
            Severity::Warning,
            "W-DANGLING-INPUT",
            vec!["VendingMachine.transfer@coin-in".into()],
            "thing is input but never received",
        );
        assert_eq!(
            d.to_line(),
            "warning W-DANGLING-INPUT VendingMachine.transfer@coin-in: thing is input but never received"
        );
    }

    #[test]
    fn json_field_names_are_stable() {
        let d = RuleDiagnostic::new(Severity::Error, "E-ADJ", vec!["x".into()], "m");
        let v: serde_json::Value = serde_json::to_value(&d).unwrap();
        let obj = v.as_object().unwrap();
        for key in ["severity", "code", "subjects", "message"] {
            assert!(obj.contains_key(key), "missing {key}");
        }
        assert_eq!(v["severity"], "error");
    }
}
