//! Zip sharing. Entries are the project files relative to the root with
//! forward slashes, in sorted order, with fixed timestamps.

use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use zip::write::SimpleFileOptions;
use zip::{CompressionMethod, DateTime, ZipArchive, ZipWriter};

use super::save::{write_file, write_folder_atomically};
use super::{deep_validate, list_files, relative_slash_path};
use crate::error::{ProjectError, Result};
use crate::model::check_relative_path;

/// Zip a valid project folder into `out`.
pub fn pack(root: impl AsRef<Path>, out: impl AsRef<Path>) -> Result<PathBuf> {
    let root = root.as_ref();
    let out = out.as_ref();
    let report = deep_validate(root)?;
    if !report.ok() {
        return Err(ProjectError::Invalid(report));
    }
    let root = fs::canonicalize(root).map_err(|e| ProjectError::io(root, e))?;
    let out_real = out
        .parent()
        .map(|p| if p.as_os_str().is_empty() { Path::new(".") } else { p })
        .and_then(|p| fs::canonicalize(p).ok())
        .and_then(|p| out.file_name().map(|n| p.join(n)));

    let mut entries = Vec::new();
    for file in list_files(&root).map_err(|e| ProjectError::io(&root, e))? {
        if Some(&file) == out_real.as_ref() {
            continue;
        }
        if let Some(rel) = relative_slash_path(&root, &file) {
            entries.push((rel, file));
        }
    }

    let sink = File::create(out).map_err(|e| ProjectError::io(out, e))?;
    let mut zip = ZipWriter::new(sink);
    let options = SimpleFileOptions::default()
        .compression_method(CompressionMethod::Deflated)
        .last_modified_time(DateTime::default())
        .unix_permissions(0o644);
    for (rel, file) in entries {
        let bytes = fs::read(&file).map_err(|e| ProjectError::io(&file, e))?;
        zip.start_file(rel, options)?;
        zip.write_all(&bytes).map_err(|e| ProjectError::io(out, e))?;
    }
    zip.finish()?;
    Ok(out.to_path_buf())
}

const S_IFMT: u32 = 0o170000;
const S_IFLNK: u32 = 0o120000;

/// Extract an archive into `dest` (absent or empty). Every entry name is
/// checked before anything is written; one unsafe entry rejects the whole
/// archive.
pub fn unpack(archive: impl AsRef<Path>, dest: impl AsRef<Path>) -> Result<PathBuf> {
    let archive = archive.as_ref();
    let dest = dest.as_ref();
    let file = File::open(archive).map_err(|e| ProjectError::io(archive, e))?;
    let mut zip = ZipArchive::new(file)?;

    let mut plan = Vec::with_capacity(zip.len());
    for i in 0..zip.len() {
        let entry = zip.by_index_raw(i)?;
        let name = entry.name()?.to_string();
        let is_dir = entry.is_dir();
        let trimmed = if is_dir {
            name.trim_end_matches('/')
        } else {
            name.as_str()
        };
        let symlink = entry.unix_mode().is_some_and(|m| m & S_IFMT == S_IFLNK);
        if symlink || check_relative_path(trimmed).is_err() {
            return Err(ProjectError::PathEscape(name));
        }
        plan.push((i, trimmed.to_string(), is_dir));
    }

    write_folder_atomically(dest, |staging| {
        for (i, rel, is_dir) in plan {
            if is_dir {
                let dir = staging.join(&rel);
                fs::create_dir_all(&dir).map_err(|e| ProjectError::io(&dir, e))?;
                continue;
            }
            let mut entry = zip.by_index(i)?;
            let mut bytes = Vec::with_capacity(entry.size() as usize);
            io::copy(&mut entry, &mut bytes).map_err(|e| ProjectError::io(archive, e))?;
            write_file(staging, &rel, &bytes)?;
        }
        Ok(())
    })
}
