//! Structured validation findings shared by manifest and folder validation.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// Stable identifiers for every finding validation can produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IssueCode {
    MissingManifest,
    BadJson,
    SchemaViolation,
    NoSublayers,
    DuplicateTimeKey,
    DanglingPath,
    PathEscape,
    UnsupportedImage,
    DuplicateLayerId,
    OrphanAsset,
}

impl IssueCode {
    pub const ALL: [IssueCode; 10] = [
        IssueCode::MissingManifest,
        IssueCode::BadJson,
        IssueCode::SchemaViolation,
        IssueCode::NoSublayers,
        IssueCode::DuplicateTimeKey,
        IssueCode::DanglingPath,
        IssueCode::PathEscape,
        IssueCode::UnsupportedImage,
        IssueCode::DuplicateLayerId,
        IssueCode::OrphanAsset,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IssueCode::MissingManifest => "MISSING_MANIFEST",
            IssueCode::BadJson => "BAD_JSON",
            IssueCode::SchemaViolation => "SCHEMA_VIOLATION",
            IssueCode::NoSublayers => "NO_SUBLAYERS",
            IssueCode::DuplicateTimeKey => "DUPLICATE_TIME_KEY",
            IssueCode::DanglingPath => "DANGLING_PATH",
            IssueCode::PathEscape => "PATH_ESCAPE",
            IssueCode::UnsupportedImage => "UNSUPPORTED_IMAGE",
            IssueCode::DuplicateLayerId => "DUPLICATE_LAYER_ID",
            IssueCode::OrphanAsset => "ORPHAN_ASSET",
        }
    }

    /// Orphaned assets are the only advisory finding.
    pub fn severity(self) -> Severity {
        match self {
            IssueCode::OrphanAsset => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for IssueCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationIssue {
    pub severity: Severity,
    pub code: IssueCode,
    /// Slash-separated locator, e.g. `layers/1/sublayers/0/image`.
    pub path: String,
    pub message: String,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev} {} at {}: {}", self.code, self.path, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record a finding; severity is derived from the code.
    pub fn push(&mut self, code: IssueCode, path: impl Into<String>, message: impl Into<String>) {
        self.issues.push(ValidationIssue {
            severity: code.severity(),
            code,
            path: path.into(),
            message: message.into(),
        });
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.issues.extend(other.issues);
    }

    pub fn issues(&self) -> &[ValidationIssue] {
        &self.issues
    }

    pub fn errors(&self) -> impl Iterator<Item = &ValidationIssue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &ValidationIssue> {
        self.issues.iter().filter(|i| i.severity == Severity::Warning)
    }

    pub fn ok(&self) -> bool {
        self.errors().next().is_none()
    }

    pub fn has_code(&self, code: IssueCode) -> bool {
        self.issues.iter().any(|i| i.code == code)
    }

    pub fn codes(&self) -> Vec<IssueCode> {
        self.issues.iter().map(|i| i.code).collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return writeln!(f, "ok: no issues");
        }
        for issue in &self.issues {
            writeln!(f, "{issue}")?;
        }
        let errors = self.errors().count();
        let warnings = self.warnings().count();
        writeln!(
            f,
            "{}: {errors} error(s), {warnings} warning(s)",
            if self.ok() { "ok" } else { "invalid" }
        )
    }
}

#[derive(Serialize, Deserialize)]
struct ReportRepr {
    ok: bool,
    issues: Vec<ValidationIssue>,
}

impl Serialize for ValidationReport {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ReportRepr {
            ok: self.ok(),
            issues: self.issues.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ValidationReport {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = ReportRepr::deserialize(deserializer)?;
        Ok(ValidationReport { issues: repr.issues })
    }
}
