//! Authoring: scaffolding and canonical edits of project folders, plus the
//! interactive wizard.
//!
//! Every edit is checked against the manifest invariants and the image
//! decoder before anything is copied, so a refused edit leaves the folder
//! untouched.

mod wizard;

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use wizard::{run_wizard, WizardError};

use crate::compositor::encode_png;
use crate::error::ProjectError;
use crate::model::{
    slugify, validate_manifest, Basemap, ColorSpec, DataLayer, ProjectInfo, ProjectManifest, SubLayer, TimeFormat,
    TimeKey, MAX_YEAR, MIN_YEAR, SCHEMA_VERSION,
};
use crate::project::{
    basemap_asset, decode_image, deep_validate, encode_manifest, icon_asset, layer_asset, load_project, save_project,
    sublayer_file_name, ImageKind, LoadedProject, MANIFEST_FILE,
};
use crate::report::ValidationReport;

const MONTH_NAMES: [&str; 12] = [
    "January",
    "February",
    "March",
    "April",
    "May",
    "June",
    "July",
    "August",
    "September",
    "October",
    "November",
    "December",
];

pub fn month_name(month: u32) -> Option<&'static str> {
    MONTH_NAMES.get(month.checked_sub(1)? as usize).copied()
}

/// Button text used when the author does not supply one.
pub fn default_display_label(key: &TimeKey) -> String {
    match key {
        TimeKey::None { label } => label.clone(),
        TimeKey::Month { month } => month_name(*month).unwrap_or("?").to_string(),
        TimeKey::Year { year } => year.to_string(),
        TimeKey::YearMonth { year, month } => {
            format!("{} {year}", month_name(*month).unwrap_or("?"))
        }
    }
}

#[derive(Debug, Error)]
pub enum AuthorError {
    /// The request is malformed or names something that does not exist.
    #[error("{0}")]
    Usage(String),
    /// The edit would break a project invariant; nothing was written.
    #[error("{0}")]
    Refused(String),
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Project(#[from] ProjectError),
}

impl AuthorError {
    pub fn report(&self) -> Option<&ValidationReport> {
        match self {
            AuthorError::Project(e) => e.report(),
            _ => None,
        }
    }
}

pub type Result<T, E = AuthorError> = std::result::Result<T, E>;

/// Build a key from CLI-style flags, checking it against the layer format.
pub fn key_from_flags(
    time_format: TimeFormat,
    year: Option<u32>,
    month: Option<u32>,
    label: Option<&str>,
) -> Result<TimeKey> {
    let key = match (time_format, year, month, label) {
        (TimeFormat::None, None, None, Some(label)) if !label.trim().is_empty() => TimeKey::None {
            label: label.trim().to_string(),
        },
        (TimeFormat::Month, None, Some(month), None) => TimeKey::Month { month },
        (TimeFormat::Year, Some(year), None, None) => TimeKey::Year { year },
        (TimeFormat::YearMonth, Some(year), Some(month), None) => TimeKey::YearMonth { year, month },
        (format, ..) => {
            let wanted = match format {
                TimeFormat::None => "--label",
                TimeFormat::Month => "--month",
                TimeFormat::Year => "--year",
                TimeFormat::YearMonth => "--year and --month",
            };
            return Err(AuthorError::Usage(format!(
                "a {format} layer takes exactly {wanted} to key a sublayer"
            )));
        }
    };
    if let Some(m) = key.month() {
        if !(1..=12).contains(&m) {
            return Err(AuthorError::Usage(format!("month {m} is outside 1..12")));
        }
    }
    if let Some(y) = key.year() {
        if !(MIN_YEAR..=MAX_YEAR).contains(&y) {
            return Err(AuthorError::Usage(format!(
                "year {y} is outside {MIN_YEAR}..{MAX_YEAR}"
            )));
        }
    }
    Ok(key)
}

/// A raster read from the author's disk, already checked to decode.
#[derive(Debug, Clone)]
pub struct SourceImage {
    pub bytes: Vec<u8>,
    pub kind: ImageKind,
    pub stem: String,
}

impl SourceImage {
    pub fn read(path: &Path) -> Result<SourceImage> {
        let bytes = fs::read(path).map_err(|source| AuthorError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_bytes(bytes, path.file_stem().and_then(|s| s.to_str()).unwrap_or("image"))
            .map_err(|reason| AuthorError::Refused(format!("{}: {reason}", path.display())))
    }

    pub fn from_bytes(bytes: Vec<u8>, stem: &str) -> std::result::Result<SourceImage, String> {
        let (kind, _) = decode_image(&bytes)?;
        Ok(SourceImage {
            bytes,
            kind,
            stem: slugify(stem),
        })
    }

    pub fn extension(&self) -> &'static str {
        match self.kind {
            ImageKind::Png => "png",
            ImageKind::Jpeg => "jpg",
        }
    }

    pub fn file_name(&self) -> String {
        format!("{}.{}", self.stem, self.extension())
    }
}

fn flat_png(width: u32, height: u32, rgba: [u8; 4]) -> Vec<u8> {
    let pixels: Vec<u8> = std::iter::repeat_n(rgba, (width * height) as usize).flatten().collect();
    encode_png(width, height, &pixels).expect("in-memory PNG encoding")
}

/// Bundled icon used when an author does not choose one.
pub fn placeholder_icon() -> SourceImage {
    SourceImage::from_bytes(flat_png(16, 16, [128, 128, 128, 255]), "default").expect("placeholder decodes")
}

/// Bundled basemap used by `new` when no image is given.
pub fn placeholder_basemap() -> SourceImage {
    SourceImage::from_bytes(flat_png(64, 64, [12, 42, 96, 255]), "basemap").expect("placeholder decodes")
}

#[derive(Debug, Clone)]
pub struct NewProject {
    pub name: String,
    pub description: String,
    pub basemap_name: String,
    pub basemap_description: String,
    pub basemap_image: Option<PathBuf>,
}

/// Create a new project folder with a basemap and no layers.
pub fn scaffold_project(dest: &Path, spec: &NewProject) -> Result<LoadedProject> {
    let image = match &spec.basemap_image {
        Some(path) => SourceImage::read(path)?,
        None => placeholder_basemap(),
    };
    let rel = basemap_asset(&image.file_name());
    let manifest = ProjectManifest {
        schema_version: SCHEMA_VERSION,
        project: ProjectInfo {
            name: spec.name.trim().to_string(),
            description: spec.description.clone(),
        },
        basemap: Basemap {
            name: spec.basemap_name.trim().to_string(),
            description: spec.basemap_description.clone(),
            image: rel.clone(),
        },
        layers: Vec::new(),
    };
    refuse_unless_valid(&manifest)?;
    let assets = [(rel, image.bytes)].into_iter().collect();
    Ok(save_project(&manifest, &assets, dest)?)
}

fn refuse_unless_valid(manifest: &ProjectManifest) -> Result<()> {
    let report = validate_manifest(manifest);
    if report.ok() {
        Ok(())
    } else {
        let first = report.errors().next().map(ToString::to_string).unwrap_or_default();
        Err(AuthorError::Refused(format!(
            "edit would make the manifest invalid: {first}"
        )))
    }
}

/// A pending edit: the new manifest and the files it needs copied in.
struct Edit {
    manifest: ProjectManifest,
    new_files: Vec<(String, Vec<u8>)>,
}

impl Edit {
    fn new(project: &LoadedProject) -> Self {
        Edit {
            manifest: project.manifest.clone(),
            new_files: Vec::new(),
        }
    }

    /// Reserve an unused relative path for `image`, suffixing `-2`, `-3`... on collision.
    fn stage(
        &mut self,
        root: &Path,
        rel_for: impl Fn(&str) -> String,
        image: &SourceImage,
        preferred_stem: &str,
    ) -> String {
        let mut candidate = rel_for(&format!("{preferred_stem}.{}", image.extension()));
        let mut n = 2;
        while root.join(&candidate).exists() || self.new_files.iter().any(|(p, _)| p == &candidate) {
            candidate = rel_for(&format!("{preferred_stem}-{n}.{}", image.extension()));
            n += 1;
        }
        self.new_files.push((candidate.clone(), image.bytes.clone()));
        candidate
    }

    fn commit(self, project: &LoadedProject) -> Result<LoadedProject> {
        refuse_unless_valid(&self.manifest)?;
        let root = &project.root;
        let before: Vec<String> = project
            .manifest
            .referenced_paths()
            .into_iter()
            .map(|(_, p)| p.to_string())
            .collect();

        for (rel, bytes) in &self.new_files {
            let path = root.join(rel);
            if let Some(dir) = path.parent() {
                fs::create_dir_all(dir).map_err(|e| ProjectError::io(dir, e))?;
            }
            fs::write(&path, bytes).map_err(|e| ProjectError::io(&path, e))?;
        }
        write_manifest_atomically(root, &self.manifest)?;

        let after: Vec<&str> = self.manifest.referenced_paths().into_iter().map(|(_, p)| p).collect();
        for stale in before.iter().filter(|p| !after.contains(&p.as_str())) {
            let _ = fs::remove_file(root.join(stale));
        }

        let report = deep_validate(root)?;
        if !report.ok() {
            return Err(ProjectError::Invalid(report).into());
        }
        Ok(load_project(root)?)
    }
}

fn write_manifest_atomically(root: &Path, manifest: &ProjectManifest) -> Result<()> {
    let tmp = root.join(format!(".{MANIFEST_FILE}.tmp"));
    fs::write(&tmp, encode_manifest(manifest)).map_err(|e| ProjectError::io(&tmp, e))?;
    let dest = root.join(MANIFEST_FILE);
    fs::rename(&tmp, &dest).map_err(|e| ProjectError::io(&dest, e))?;
    Ok(())
}

#[derive(Debug, Clone, Default)]
pub struct BasemapEdit {
    pub name: Option<String>,
    pub description: Option<String>,
    pub image: Option<PathBuf>,
}

pub fn set_basemap(root: &Path, edit: &BasemapEdit) -> Result<LoadedProject> {
    let project = load_project(root)?;
    let mut pending = Edit::new(&project);
    if let Some(name) = &edit.name {
        pending.manifest.basemap.name = name.trim().to_string();
    }
    if let Some(description) = &edit.description {
        pending.manifest.basemap.description = description.clone();
    }
    if let Some(path) = &edit.image {
        let image = SourceImage::read(path)?;
        let stem = image.stem.clone();
        pending.manifest.basemap.image = pending.stage(&project.root, basemap_asset, &image, &stem);
    }
    pending.commit(&project)
}

#[derive(Debug, Clone)]
pub struct SublayerDraft {
    pub key: TimeKey,
    pub display_label: Option<String>,
    pub image: PathBuf,
}

#[derive(Debug, Clone)]
pub struct LayerDraft {
    pub id: Option<String>,
    pub name: String,
    pub description: String,
    pub credit: String,
    pub icon: Option<PathBuf>,
    pub color: ColorSpec,
    pub time_format: TimeFormat,
    /// A layer is never written without at least one sublayer.
    pub first_sublayer: SublayerDraft,
}

/// Append a layer with its first sublayer.
pub fn add_layer(root: &Path, draft: &LayerDraft) -> Result<LoadedProject> {
    let project = load_project(root)?;
    let id = draft.id.clone().unwrap_or_else(|| slugify(&draft.name));
    if project.manifest.layer(&id).is_some() {
        return Err(AuthorError::Refused(format!("a layer with id {id:?} already exists")));
    }
    if draft.first_sublayer.key.kind() != draft.time_format {
        return Err(AuthorError::Usage(format!(
            "sublayer key {} does not match time format {}",
            draft.first_sublayer.key, draft.time_format
        )));
    }
    let icon_image = match &draft.icon {
        Some(path) => SourceImage::read(path)?,
        None => placeholder_icon(),
    };
    let sub_image = SourceImage::read(&draft.first_sublayer.image)?;

    let mut pending = Edit::new(&project);
    let icon = pending.stage(&project.root, icon_asset, &icon_image, &slugify(&id));
    let key = draft.first_sublayer.key.clone();
    let stem = sublayer_stem(&key);
    let image = pending.stage(&project.root, |f| layer_asset(&id, f), &sub_image, &stem);
    pending.manifest.layers.push(DataLayer {
        id: id.clone(),
        name: draft.name.trim().to_string(),
        description: draft.description.clone(),
        credit: draft.credit.clone(),
        icon,
        color: draft.color.clone(),
        time_format: draft.time_format,
        sublayers: vec![SubLayer {
            display_label: draft
                .first_sublayer
                .display_label
                .clone()
                .unwrap_or_else(|| default_display_label(&key)),
            key,
            image,
        }],
    });
    pending.commit(&project)
}

fn sublayer_stem(key: &TimeKey) -> String {
    let name = sublayer_file_name(key, "x");
    name.trim_end_matches(".x").to_string()
}

/// Add one keyed image to an existing layer. Duplicate keys are refused
/// before any file is copied.
pub fn add_sublayer(root: &Path, layer_id: &str, draft: &SublayerDraft) -> Result<LoadedProject> {
    let project = load_project(root)?;
    let Some(layer) = project.manifest.layer(layer_id) else {
        return Err(AuthorError::Usage(format!("no layer with id {layer_id:?}")));
    };
    if draft.key.kind() != layer.time_format {
        return Err(AuthorError::Usage(format!(
            "layer {layer_id:?} has time format {}, got a {} key",
            layer.time_format,
            draft.key.kind()
        )));
    }
    if layer.sublayer_for(&draft.key).is_some() {
        return Err(AuthorError::Refused(format!(
            "layer {layer_id:?} already has a sublayer for {}",
            draft.key
        )));
    }
    let image = SourceImage::read(&draft.image)?;

    let mut pending = Edit::new(&project);
    let stem = sublayer_stem(&draft.key);
    let rel = pending.stage(&project.root, |f| layer_asset(layer_id, f), &image, &stem);
    let layer = pending.manifest.layer_mut(layer_id).expect("checked above");
    layer.insert_sublayer(SubLayer {
        key: draft.key.clone(),
        display_label: draft
            .display_label
            .clone()
            .unwrap_or_else(|| default_display_label(&draft.key)),
        image: rel,
    });
    pending.commit(&project)
}
