//! Canonical `project.json` encoding: sorted keys, two-space indent, UTF-8,
//! trailing newline.

use thiserror::Error;

use crate::model::ProjectManifest;
use crate::report::IssueCode;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("manifest is not valid JSON: {0}")]
    Syntax(String),
    #[error("manifest does not match the schema: {0}")]
    Schema(String),
}

impl DecodeError {
    pub fn code(&self) -> IssueCode {
        match self {
            DecodeError::Syntax(_) => IssueCode::BadJson,
            DecodeError::Schema(_) => IssueCode::SchemaViolation,
        }
    }
}

pub fn encode_manifest(manifest: &ProjectManifest) -> String {
    // serde_json::Map is ordered by key, so going through Value sorts fields.
    let value = serde_json::to_value(manifest).expect("manifest is always representable as JSON");
    let mut text = serde_json::to_string_pretty(&value).expect("JSON value always serializes");
    text.push('\n');
    text
}

pub fn decode_manifest(bytes: &[u8]) -> Result<ProjectManifest, DecodeError> {
    let value: serde_json::Value = serde_json::from_slice(bytes).map_err(|e| DecodeError::Syntax(e.to_string()))?;
    serde_json::from_value(value).map_err(|e| DecodeError::Schema(e.to_string()))
}
