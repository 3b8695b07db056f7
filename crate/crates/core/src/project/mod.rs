//! On-disk project folders: canonical manifest codec, deep validation,
//! atomic save, and zip sharing.
//!
//! Layout:
//!
//! ```text
//! <root>/
//!   project.json
//!   assets/basemap/<file>
//!   assets/icons/<file>
//!   assets/layers/<layer-id>/<file>
//! ```

mod archive;
mod codec;
mod save;
mod validate;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub use archive::{pack, unpack};
pub use codec::{decode_manifest, encode_manifest, DecodeError};
pub use save::save_project;
pub use validate::{decode_image, deep_validate, load_project, ImageKind};

use crate::model::{slugify, ProjectManifest, TimeKey};

pub const MANIFEST_FILE: &str = "project.json";
pub const ASSETS_DIR: &str = "assets";

pub fn basemap_asset(file: &str) -> String {
    format!("{ASSETS_DIR}/basemap/{file}")
}

pub fn icon_asset(file: &str) -> String {
    format!("{ASSETS_DIR}/icons/{file}")
}

pub fn layer_asset(layer_id: &str, file: &str) -> String {
    format!("{ASSETS_DIR}/layers/{layer_id}/{file}")
}

/// Conventional file name for a sublayer image: `2000`, `M06`, `2000-01`,
/// or the slug of a static label, plus `extension`.
pub fn sublayer_file_name(key: &TimeKey, extension: &str) -> String {
    let stem = match key {
        TimeKey::None { label } => slugify(label),
        TimeKey::Month { month } => format!("M{month:02}"),
        TimeKey::Year { year } => year.to_string(),
        TimeKey::YearMonth { year, month } => format!("{year}-{month:02}"),
    };
    format!("{stem}.{extension}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssetInfo {
    pub byte_len: u64,
    pub width: u32,
    pub height: u32,
    pub kind: ImageKind,
}

/// A project folder that passed deep validation.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedProject {
    /// Canonicalized absolute root.
    pub root: PathBuf,
    pub manifest: ProjectManifest,
    /// Every image the manifest references, keyed by its relative path.
    pub asset_index: BTreeMap<String, AssetInfo>,
}

impl LoadedProject {
    pub fn asset_path(&self, relative: &str) -> PathBuf {
        self.root.join(relative)
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.root.join(MANIFEST_FILE)
    }

    pub fn canonical_manifest(&self) -> String {
        encode_manifest(&self.manifest)
    }
}

/// Relative path of `path` under `root` with forward slashes.
pub(crate) fn relative_slash_path(root: &Path, path: &Path) -> Option<String> {
    let rel = path.strip_prefix(root).ok()?;
    let parts: Option<Vec<&str>> = rel.components().map(|c| c.as_os_str().to_str()).collect();
    Some(parts?.join("/"))
}

/// Regular files and symlinks under `dir`, recursively, sorted by relative
/// path. Symlinked directories are not descended into.
pub(crate) fn list_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
        let mut entries: Vec<_> = std::fs::read_dir(dir)?.collect::<Result<_, _>>()?;
        entries.sort_by_key(|e| e.file_name());
        for entry in entries {
            let file_type = entry.file_type()?;
            if file_type.is_dir() {
                walk(&entry.path(), out)?;
            } else {
                out.push(entry.path());
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    if dir.is_dir() {
        walk(dir, &mut out)?;
    }
    out.sort_by(|a, b| a.as_os_str().cmp(b.as_os_str()));
    Ok(out)
}

pub(crate) fn is_empty_dir(path: &Path) -> std::io::Result<bool> {
    Ok(std::fs::read_dir(path)?.next().is_none())
}
