use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use image::{ImageFormat, RgbaImage};

use super::{codec, list_files, relative_slash_path, AssetInfo, LoadedProject, ASSETS_DIR, MANIFEST_FILE};
use crate::error::{ProjectError, Result};
use crate::model::{check_relative_path, validate_manifest, ProjectManifest};
use crate::report::{IssueCode, ValidationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ImageKind {
    Png,
    Jpeg,
}

impl ImageKind {
    pub fn content_type(self) -> &'static str {
        match self {
            ImageKind::Png => "image/png",
            ImageKind::Jpeg => "image/jpeg",
        }
    }
}

/// Decode PNG or JPEG bytes to straight-alpha RGBA8. Anything else fails.
pub fn decode_image(bytes: &[u8]) -> std::result::Result<(ImageKind, RgbaImage), String> {
    let format = image::guess_format(bytes).map_err(|_| "not a recognizable image".to_string())?;
    let kind = match format {
        ImageFormat::Png => ImageKind::Png,
        ImageFormat::Jpeg => ImageKind::Jpeg,
        other => return Err(format!("{other:?} images are not supported (PNG or JPEG only)")),
    };
    let decoded = image::load_from_memory_with_format(bytes, format).map_err(|e| e.to_string())?;
    Ok((kind, decoded.to_rgba8()))
}

struct Inspection {
    report: ValidationReport,
    loaded: Option<(ProjectManifest, BTreeMap<String, AssetInfo>)>,
}

fn canonical_root(root: &Path) -> Result<PathBuf> {
    fs::read_dir(root).map_err(|e| ProjectError::io(root, e))?;
    fs::canonicalize(root).map_err(|e| ProjectError::io(root, e))
}

fn inspect(root: &Path) -> Result<Inspection> {
    let root = canonical_root(root)?;
    let mut report = ValidationReport::new();
    let manifest_path = root.join(MANIFEST_FILE);

    if !manifest_path.is_file() {
        report.push(IssueCode::MissingManifest, MANIFEST_FILE, "project.json not found");
        return Ok(Inspection { report, loaded: None });
    }
    let bytes = fs::read(&manifest_path).map_err(|e| ProjectError::io(&manifest_path, e))?;
    let manifest = match codec::decode_manifest(&bytes) {
        Ok(m) => m,
        Err(err) => {
            report.push(err.code(), MANIFEST_FILE, err.to_string());
            return Ok(Inspection { report, loaded: None });
        }
    };

    report.extend(validate_manifest(&manifest));

    let references = manifest.referenced_paths();
    let referenced: BTreeSet<&str> = references.iter().map(|(_, p)| *p).collect();

    // Paths first: existence and confinement.
    let mut resolved: Vec<(&str, &str, PathBuf)> = Vec::new();
    for (locator, rel) in &references {
        if check_relative_path(rel).is_err() {
            // Already reported by validate_manifest.
            continue;
        }
        match fs::canonicalize(root.join(rel)) {
            Err(e) if e.kind() == io::ErrorKind::NotFound => report.push(
                IssueCode::DanglingPath,
                locator.as_str(),
                format!("{rel} does not exist"),
            ),
            Err(e) => report.push(
                IssueCode::DanglingPath,
                locator.as_str(),
                format!("{rel} cannot be resolved: {e}"),
            ),
            Ok(real) if !real.starts_with(&root) => report.push(
                IssueCode::PathEscape,
                locator.as_str(),
                format!("{rel} resolves outside the project folder"),
            ),
            Ok(real) if !real.is_file() => report.push(
                IssueCode::DanglingPath,
                locator.as_str(),
                format!("{rel} is not a regular file"),
            ),
            Ok(real) => resolved.push((locator.as_str(), rel, real)),
        }
    }

    // Then decodability, once per distinct file.
    let mut index = BTreeMap::new();
    let mut failed: BTreeMap<&str, String> = BTreeMap::new();
    for (locator, rel, real) in resolved {
        if index.contains_key(rel) {
            continue;
        }
        let problem = match failed.get(rel) {
            Some(problem) => Some(problem.clone()),
            None => {
                let bytes = fs::read(&real).map_err(|e| ProjectError::io(&real, e))?;
                match decode_image(&bytes) {
                    Ok((kind, img)) => {
                        index.insert(
                            rel.to_string(),
                            AssetInfo {
                                byte_len: bytes.len() as u64,
                                width: img.width(),
                                height: img.height(),
                                kind,
                            },
                        );
                        None
                    }
                    Err(problem) => {
                        failed.insert(rel, problem.clone());
                        Some(problem)
                    }
                }
            }
        };
        if let Some(problem) = problem {
            report.push(IssueCode::UnsupportedImage, locator, format!("{rel}: {problem}"));
        }
    }

    let assets = root.join(ASSETS_DIR);
    for file in list_files(&assets).map_err(|e| ProjectError::io(&assets, e))? {
        let Some(rel) = relative_slash_path(&root, &file) else {
            continue;
        };
        if !referenced.contains(rel.as_str()) {
            report.push(IssueCode::OrphanAsset, rel, "file is not referenced by the manifest");
        }
    }

    Ok(Inspection {
        report,
        loaded: Some((manifest, index)),
    })
}

/// Full folder validation. Read-only; the only hard failure is an
/// unreadable root.
pub fn deep_validate(root: impl AsRef<Path>) -> Result<ValidationReport> {
    Ok(inspect(root.as_ref())?.report)
}

/// Load a folder, or return the complete report as
/// [`ProjectError::Invalid`] if any error-severity issue exists.
pub fn load_project(root: impl AsRef<Path>) -> Result<LoadedProject> {
    let root = canonical_root(root.as_ref())?;
    let inspection = inspect(&root)?;
    match inspection.loaded {
        Some((manifest, asset_index)) if inspection.report.ok() => Ok(LoadedProject {
            root,
            manifest,
            asset_index,
        }),
        _ => Err(ProjectError::Invalid(inspection.report)),
    }
}
