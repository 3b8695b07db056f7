use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use super::{codec, deep_validate, is_empty_dir, load_project, LoadedProject, MANIFEST_FILE};
use crate::error::{ProjectError, Result};
use crate::model::{check_relative_path, validate_manifest, ProjectManifest};

/// Create a sibling temp folder next to `dest`, run `populate` on it, and
/// rename it into place. `dest` must be absent or an empty directory.
pub(crate) fn write_folder_atomically(dest: &Path, populate: impl FnOnce(&Path) -> Result<()>) -> Result<PathBuf> {
    if dest.exists() {
        let empty = dest.is_dir() && is_empty_dir(dest).map_err(|e| ProjectError::io(dest, e))?;
        if !empty {
            return Err(ProjectError::DestinationNotEmpty(dest.to_path_buf()));
        }
    }
    let parent = match dest.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent).map_err(|e| ProjectError::io(&parent, e))?;
    let staging = tempfile::Builder::new()
        .prefix(".makawalu-staging-")
        .tempdir_in(&parent)
        .map_err(|e| ProjectError::io(&parent, e))?;

    populate(staging.path())?;

    if dest.exists() {
        fs::remove_dir(dest).map_err(|e| ProjectError::io(dest, e))?;
    }
    let staged = staging.keep();
    if let Err(e) = fs::rename(&staged, dest) {
        let _ = fs::remove_dir_all(&staged);
        return Err(ProjectError::io(dest, e));
    }
    Ok(dest.to_path_buf())
}

pub(crate) fn write_file(root: &Path, relative: &str, bytes: &[u8]) -> Result<()> {
    let path = root.join(relative);
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| ProjectError::io(dir, e))?;
    }
    fs::write(&path, bytes).map_err(|e| ProjectError::io(&path, e))
}

/// Write a new project folder at `dest` from a manifest and the bytes of
/// every asset it references. The folder appears only once it passes deep
/// validation.
pub fn save_project(
    manifest: &ProjectManifest,
    staged_assets: &BTreeMap<String, Vec<u8>>,
    dest: impl AsRef<Path>,
) -> Result<LoadedProject> {
    let dest = dest.as_ref();
    let report = validate_manifest(manifest);
    if !report.ok() {
        return Err(ProjectError::Invalid(report));
    }
    for (_, rel) in manifest.referenced_paths() {
        if !staged_assets.contains_key(rel) {
            return Err(ProjectError::MissingStagedAsset(rel.to_string()));
        }
    }
    if let Some(bad) = staged_assets.keys().find(|p| check_relative_path(p).is_err()) {
        return Err(ProjectError::PathEscape(bad.clone()));
    }

    write_folder_atomically(dest, |staging| {
        write_file(staging, MANIFEST_FILE, codec::encode_manifest(manifest).as_bytes())?;
        for (rel, bytes) in staged_assets {
            write_file(staging, rel, bytes)?;
        }
        let report = deep_validate(staging)?;
        if report.ok() {
            Ok(())
        } else {
            Err(ProjectError::Invalid(report))
        }
    })?;
    load_project(dest)
}
