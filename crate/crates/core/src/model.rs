//! Domain types for an authored layer deck and manifest-level validation.
//!
//! A deck is a basemap raster plus an ordered list of data layers. Each data
//! layer holds one or more sublayer images keyed by a [`TimeKey`] whose kind
//! is fixed by the layer's [`TimeFormat`].

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::report::{IssueCode, ValidationReport};

pub const SCHEMA_VERSION: u32 = 1;
pub const MIN_YEAR: u32 = 1;
pub const MAX_YEAR: u32 = 9999;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectInfo {
    pub name: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Basemap {
    pub name: String,
    pub description: String,
    pub image: String,
}

/// A `#RRGGBB` color. Tools write the uppercase form; validation accepts
/// either case.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ColorSpec(String);

impl ColorSpec {
    /// Parse user input into canonical uppercase form.
    pub fn parse(input: &str) -> Option<ColorSpec> {
        let trimmed = input.trim();
        if Self::is_well_formed(trimmed) {
            Some(ColorSpec(trimmed.to_ascii_uppercase()))
        } else {
            None
        }
    }

    /// Wrap a raw string without checking it; `validate_manifest` reports
    /// malformed values.
    pub fn new_unchecked(raw: impl Into<String>) -> ColorSpec {
        ColorSpec(raw.into())
    }

    pub fn is_well_formed(raw: &str) -> bool {
        raw.len() == 7 && raw.starts_with('#') && raw[1..].chars().all(|c| c.is_ascii_hexdigit())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The color as an RGB triple, if well formed.
    pub fn rgb(&self) -> Option<[u8; 3]> {
        if !Self::is_well_formed(&self.0) {
            return None;
        }
        let channel = |i: usize| u8::from_str_radix(&self.0[i..i + 2], 16).ok();
        Some([channel(1)?, channel(3)?, channel(5)?])
    }
}

impl fmt::Display for ColorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeFormat {
    None,
    Month,
    Year,
    YearMonth,
}

impl TimeFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            TimeFormat::None => "none",
            TimeFormat::Month => "month",
            TimeFormat::Year => "year",
            TimeFormat::YearMonth => "year_month",
        }
    }

    pub fn parse(input: &str) -> Option<TimeFormat> {
        match input.trim() {
            "none" => Some(TimeFormat::None),
            "month" => Some(TimeFormat::Month),
            "year" => Some(TimeFormat::Year),
            "year_month" => Some(TimeFormat::YearMonth),
            _ => None,
        }
    }

    pub fn is_time_based(self) -> bool {
        self != TimeFormat::None
    }
}

impl fmt::Display for TimeFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The key of one sublayer. Its JSON shape is the set of fields present:
/// `{"label"}`, `{"month"}`, `{"year"}` or `{"year", "month"}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawKey", into = "RawKey")]
pub enum TimeKey {
    None { label: String },
    Month { month: u32 },
    Year { year: u32 },
    YearMonth { year: u32, month: u32 },
}

impl TimeKey {
    pub fn kind(&self) -> TimeFormat {
        match self {
            TimeKey::None { .. } => TimeFormat::None,
            TimeKey::Month { .. } => TimeFormat::Month,
            TimeKey::Year { .. } => TimeFormat::Year,
            TimeKey::YearMonth { .. } => TimeFormat::YearMonth,
        }
    }

    pub fn year(&self) -> Option<u32> {
        match self {
            TimeKey::Year { year } | TimeKey::YearMonth { year, .. } => Some(*year),
            _ => None,
        }
    }

    pub fn month(&self) -> Option<u32> {
        match self {
            TimeKey::Month { month } | TimeKey::YearMonth { month, .. } => Some(*month),
            _ => None,
        }
    }

    /// Range violations for the numeric components, if any.
    fn range_problem(&self) -> Option<String> {
        if let Some(month) = self.month() {
            if !(1..=12).contains(&month) {
                return Some(format!("month {month} is outside 1..12"));
            }
        }
        if let Some(year) = self.year() {
            if !(MIN_YEAR..=MAX_YEAR).contains(&year) {
                return Some(format!("year {year} is outside {MIN_YEAR}..{MAX_YEAR}"));
            }
        }
        if let TimeKey::None { label } = self {
            if label.trim().is_empty() {
                return Some("label must not be empty".into());
            }
        }
        None
    }
}

impl fmt::Display for TimeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeKey::None { label } => write!(f, "{label:?}"),
            TimeKey::Month { month } => write!(f, "M{month:02}"),
            TimeKey::Year { year } => write!(f, "{year}"),
            TimeKey::YearMonth { year, month } => write!(f, "{year}-{month:02}"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKey {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    year: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    month: Option<u32>,
}

impl TryFrom<RawKey> for TimeKey {
    type Error = String;

    fn try_from(raw: RawKey) -> Result<Self, Self::Error> {
        match (raw.label, raw.year, raw.month) {
            (Some(label), None, None) => Ok(TimeKey::None { label }),
            (None, None, Some(month)) => Ok(TimeKey::Month { month }),
            (None, Some(year), None) => Ok(TimeKey::Year { year }),
            (None, Some(year), Some(month)) => Ok(TimeKey::YearMonth { year, month }),
            _ => Err("time key must be one of {label}, {month}, {year} or {year, month}".into()),
        }
    }
}

impl From<TimeKey> for RawKey {
    fn from(key: TimeKey) -> Self {
        match key {
            TimeKey::None { label } => RawKey {
                label: Some(label),
                year: None,
                month: None,
            },
            TimeKey::Month { month } => RawKey {
                label: None,
                year: None,
                month: Some(month),
            },
            TimeKey::Year { year } => RawKey {
                label: None,
                year: Some(year),
                month: None,
            },
            TimeKey::YearMonth { year, month } => RawKey {
                label: None,
                year: Some(year),
                month: Some(month),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubLayer {
    pub key: TimeKey,
    pub display_label: String,
    pub image: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataLayer {
    pub id: String,
    pub name: String,
    pub description: String,
    pub credit: String,
    pub icon: String,
    pub color: ColorSpec,
    pub time_format: TimeFormat,
    pub sublayers: Vec<SubLayer>,
}

impl DataLayer {
    pub fn sublayer_for(&self, key: &TimeKey) -> Option<(usize, &SubLayer)> {
        self.sublayers.iter().enumerate().find(|(_, s)| &s.key == key)
    }

    /// Every asset path this layer references, icon first.
    pub fn referenced_paths(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.icon.as_str()).chain(self.sublayers.iter().map(|s| s.image.as_str()))
    }

    /// Insert a sublayer, keeping time-based layers in ascending key order.
    /// Static layers append in declaration order.
    pub fn insert_sublayer(&mut self, sub: SubLayer) {
        if !self.time_format.is_time_based() {
            self.sublayers.push(sub);
            return;
        }
        let pos = self
            .sublayers
            .iter()
            .position(|s| chrono_cmp(&s.key, &sub.key) == Some(Ordering::Greater))
            .unwrap_or(self.sublayers.len());
        self.sublayers.insert(pos, sub);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectManifest {
    pub schema_version: u32,
    pub project: ProjectInfo,
    pub basemap: Basemap,
    pub layers: Vec<DataLayer>,
}

impl ProjectManifest {
    pub fn layer(&self, id: &str) -> Option<&DataLayer> {
        self.layers.iter().find(|l| l.id == id)
    }

    pub fn layer_mut(&mut self, id: &str) -> Option<&mut DataLayer> {
        self.layers.iter_mut().find(|l| l.id == id)
    }

    /// Every referenced asset path with a locator for the referencing field,
    /// in manifest order.
    pub fn referenced_paths(&self) -> Vec<(String, &str)> {
        let mut out = vec![("basemap/image".to_string(), self.basemap.image.as_str())];
        for (i, layer) in self.layers.iter().enumerate() {
            out.push((format!("layers/{i}/icon"), layer.icon.as_str()));
            for (j, sub) in layer.sublayers.iter().enumerate() {
                out.push((format!("layers/{i}/sublayers/{j}/image"), sub.image.as_str()));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContractError {
    #[error("cannot compare a {left} key with a {right} key")]
    MismatchedKinds { left: TimeFormat, right: TimeFormat },
    #[error("operation requires a {expected} layer but layer has time format {found}")]
    WrongTimeFormat { expected: &'static str, found: TimeFormat },
    #[error("a year must not be given for a month-format layer")]
    UnexpectedYear,
    #[error("a year is required for a year_month layer")]
    MissingYear,
    #[error("label {0:?} is not declared by the layer")]
    UnknownLabel(String),
}

/// Calendar/numeric order for time-based keys of the same kind; `None` for
/// static keys or mismatched kinds.
fn chrono_cmp(a: &TimeKey, b: &TimeKey) -> Option<Ordering> {
    match (a, b) {
        (TimeKey::Month { month: x }, TimeKey::Month { month: y }) => Some(x.cmp(y)),
        (TimeKey::Year { year: x }, TimeKey::Year { year: y }) => Some(x.cmp(y)),
        (TimeKey::YearMonth { year: ya, month: ma }, TimeKey::YearMonth { year: yb, month: mb }) => {
            Some(ya.cmp(yb).then(ma.cmp(mb)))
        }
        _ => None,
    }
}

/// Total order over keys of one kind. Static labels order by their first
/// declaration in `layer`, not lexicographically.
pub fn compare_time_keys(a: &TimeKey, b: &TimeKey, layer: &DataLayer) -> Result<Ordering, ContractError> {
    if a.kind() != b.kind() {
        return Err(ContractError::MismatchedKinds {
            left: a.kind(),
            right: b.kind(),
        });
    }
    if let Some(ord) = chrono_cmp(a, b) {
        return Ok(ord);
    }
    let position = |key: &TimeKey| -> Result<usize, ContractError> {
        let TimeKey::None { label } = key else {
            unreachable!("non-static kinds handled above")
        };
        layer
            .sublayers
            .iter()
            .position(|s| matches!(&s.key, TimeKey::None { label: l } if l == label))
            .ok_or_else(|| ContractError::UnknownLabel(label.clone()))
    };
    Ok(position(a)?.cmp(&position(b)?))
}

/// Distinct years present in a `year` or `year_month` layer, ascending.
pub fn years_of(layer: &DataLayer) -> Result<Vec<u32>, ContractError> {
    match layer.time_format {
        TimeFormat::Year | TimeFormat::YearMonth => {}
        found => {
            return Err(ContractError::WrongTimeFormat {
                expected: "year or year_month",
                found,
            })
        }
    }
    let years: BTreeSet<u32> = layer.sublayers.iter().filter_map(|s| s.key.year()).collect();
    Ok(years.into_iter().collect())
}

/// Distinct months present, ascending. `year` must be given exactly when the
/// layer is `year_month`.
pub fn months_of(layer: &DataLayer, year: Option<u32>) -> Result<Vec<u32>, ContractError> {
    let months: BTreeSet<u32> = match (layer.time_format, year) {
        (TimeFormat::Month, None) => layer.sublayers.iter().filter_map(|s| s.key.month()).collect(),
        (TimeFormat::Month, Some(_)) => return Err(ContractError::UnexpectedYear),
        (TimeFormat::YearMonth, Some(y)) => layer
            .sublayers
            .iter()
            .filter(|s| s.key.year() == Some(y))
            .filter_map(|s| s.key.month())
            .collect(),
        (TimeFormat::YearMonth, None) => return Err(ContractError::MissingYear),
        (found, _) => {
            return Err(ContractError::WrongTimeFormat {
                expected: "month or year_month",
                found,
            })
        }
    };
    Ok(months.into_iter().collect())
}

pub fn is_valid_slug(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-')
}

/// Lowercase, hyphen-separated form of arbitrary text.
pub fn slugify(text: &str) -> String {
    let mut slug = String::new();
    for c in text.chars() {
        if c.is_ascii_alphanumeric() {
            slug.push(c.to_ascii_lowercase());
        } else if !slug.ends_with('-') && !slug.is_empty() {
            slug.push('-');
        }
    }
    while slug.ends_with('-') {
        slug.pop();
    }
    if slug.is_empty() {
        slug.push_str("layer");
    }
    slug
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathProblem {
    Empty,
    /// Absolute, parent-traversing or backslash-separated.
    Escapes,
    /// `.` or empty segments, or control characters.
    Malformed,
}

/// Check that `path` is a plain forward-slash relative path that cannot
/// leave the folder it is resolved against.
pub fn check_relative_path(path: &str) -> Result<(), PathProblem> {
    if path.is_empty() {
        return Err(PathProblem::Empty);
    }
    let bytes = path.as_bytes();
    let drive_prefix = bytes.len() >= 2 && bytes[1] == b':' && bytes[0].is_ascii_alphabetic();
    if path.starts_with('/') || path.contains('\\') || drive_prefix {
        return Err(PathProblem::Escapes);
    }
    for segment in path.split('/') {
        if segment == ".." {
            return Err(PathProblem::Escapes);
        }
        if segment.is_empty() || segment == "." || segment.chars().any(char::is_control) {
            return Err(PathProblem::Malformed);
        }
    }
    Ok(())
}

fn check_path_field(report: &mut ValidationReport, locator: &str, path: &str) {
    match check_relative_path(path) {
        Ok(()) => {}
        Err(PathProblem::Escapes) => report.push(
            IssueCode::PathEscape,
            locator,
            format!("path {path:?} escapes the project folder"),
        ),
        Err(PathProblem::Empty) => report.push(IssueCode::SchemaViolation, locator, "path must not be empty"),
        Err(PathProblem::Malformed) => report.push(
            IssueCode::SchemaViolation,
            locator,
            format!("path {path:?} has empty, '.' or control-character segments"),
        ),
    }
}

fn require_text(report: &mut ValidationReport, locator: &str, value: &str) {
    if value.trim().is_empty() {
        report.push(IssueCode::SchemaViolation, locator, "must not be empty");
    }
}

/// Report every manifest invariant violation. Never fails; an empty error
/// list means the manifest is structurally sound.
pub fn validate_manifest(manifest: &ProjectManifest) -> ValidationReport {
    let mut report = ValidationReport::new();

    if manifest.schema_version != SCHEMA_VERSION {
        report.push(
            IssueCode::SchemaViolation,
            "schema_version",
            format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                manifest.schema_version
            ),
        );
    }
    require_text(&mut report, "project/name", &manifest.project.name);
    require_text(&mut report, "basemap/name", &manifest.basemap.name);
    check_path_field(&mut report, "basemap/image", &manifest.basemap.image);

    let mut seen_ids = BTreeSet::new();
    for (i, layer) in manifest.layers.iter().enumerate() {
        let at = |field: &str| format!("layers/{i}/{field}");

        if !is_valid_slug(&layer.id) {
            report.push(
                IssueCode::SchemaViolation,
                at("id"),
                format!("layer id {:?} must be lowercase letters, digits and hyphens", layer.id),
            );
        }
        if !seen_ids.insert(layer.id.as_str()) {
            report.push(
                IssueCode::DuplicateLayerId,
                at("id"),
                format!("layer id {:?} is already used by an earlier layer", layer.id),
            );
        }
        require_text(&mut report, &at("name"), &layer.name);
        check_path_field(&mut report, &at("icon"), &layer.icon);
        if !ColorSpec::is_well_formed(layer.color.as_str()) {
            report.push(
                IssueCode::SchemaViolation,
                at("color"),
                format!("color {:?} must have the form #RRGGBB", layer.color.as_str()),
            );
        }
        if layer.sublayers.is_empty() {
            report.push(
                IssueCode::NoSublayers,
                at("sublayers"),
                "at least one sublayer is required",
            );
        }

        let mut previous: Option<&TimeKey> = None;
        for (j, sub) in layer.sublayers.iter().enumerate() {
            let sub_at = |field: &str| format!("layers/{i}/sublayers/{j}/{field}");
            let key_ok = if sub.key.kind() != layer.time_format {
                report.push(
                    IssueCode::SchemaViolation,
                    sub_at("key"),
                    format!(
                        "{} key in a layer with time format {}",
                        sub.key.kind(),
                        layer.time_format
                    ),
                );
                false
            } else if let Some(problem) = sub.key.range_problem() {
                report.push(IssueCode::SchemaViolation, sub_at("key"), problem);
                false
            } else {
                true
            };

            if key_ok {
                if layer.sublayers[..j].iter().any(|s| s.key == sub.key) {
                    report.push(
                        IssueCode::DuplicateTimeKey,
                        sub_at("key"),
                        format!("key {} appears more than once", sub.key),
                    );
                }
                if let Some(prev) = previous {
                    if chrono_cmp(prev, &sub.key) == Some(Ordering::Greater) {
                        report.push(
                            IssueCode::SchemaViolation,
                            sub_at("key"),
                            format!("key {} is out of ascending order after {prev}", sub.key),
                        );
                    }
                }
                previous = Some(&sub.key);
            }

            require_text(&mut report, &sub_at("display_label"), &sub.display_label);
            check_path_field(&mut report, &sub_at("image"), &sub.image);
        }
    }
    report
}
