//! `presenter_settings.json`: the calibration layout, kept beside the
//! manifest so the authored `project.json` is never rewritten.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ProjectManifest;
use crate::state::{apply_event, identity_layout, ElementId, ElementTransform, PresenterState, StateEvent};

pub const SETTINGS_FILE: &str = "presenter_settings.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresenterSettings {
    pub calibration_locked: bool,
    pub transforms: BTreeMap<ElementId, ElementTransform>,
}

impl PresenterSettings {
    pub fn from_state(state: &PresenterState) -> Self {
        PresenterSettings {
            calibration_locked: state.calibration_locked,
            transforms: state.transforms.clone(),
        }
    }
}

#[derive(Debug, Error)]
pub enum SettingsError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{} is corrupt: {source}", path.display())]
    Corrupt {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub fn settings_path(root: &Path) -> PathBuf {
    root.join(SETTINGS_FILE)
}

/// Write the layout part of `state`, replacing any previous file atomically.
pub fn persist_settings(root: &Path, state: &PresenterState) -> io::Result<()> {
    let mut text =
        serde_json::to_string_pretty(&PresenterSettings::from_state(state)).expect("settings always serialize");
    text.push('\n');
    let tmp = root.join(format!(".{SETTINGS_FILE}.tmp"));
    fs::write(&tmp, text)?;
    fs::rename(&tmp, settings_path(root))
}

/// `Ok(None)` when no settings file exists.
pub fn load_settings(root: &Path) -> Result<Option<PresenterSettings>, SettingsError> {
    let path = settings_path(root);
    let bytes = match fs::read(&path) {
        Ok(b) => b,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
        Err(source) => return Err(SettingsError::Io { path, source }),
    };
    serde_json::from_slice(&bytes)
        .map(Some)
        .map_err(|source| SettingsError::Corrupt { path, source })
}

/// Overlay saved settings on `state` through the normal transition rules,
/// so entries naming unknown layers or carrying invalid scales are dropped.
/// Returns the new state (version unchanged) and one note per dropped entry.
pub fn apply_settings(
    state: &PresenterState,
    settings: &PresenterSettings,
    manifest: &ProjectManifest,
) -> (PresenterState, Vec<String>) {
    let mut current = state.clone();
    current.calibration_locked = false;
    current.transforms = identity_layout(manifest);
    let mut dropped = Vec::new();
    for transform in settings.transforms.values() {
        match apply_event(&current, &StateEvent::SetTransform(transform.clone()), manifest) {
            Ok(next) => current = next,
            Err(rejection) => dropped.push(format!(
                "ignored saved transform for {}: {rejection}",
                transform.element_id
            )),
        }
    }
    current.calibration_locked = settings.calibration_locked;
    current.version = state.version;
    (current, dropped)
}
