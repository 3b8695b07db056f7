//! Interactive four-step authoring: project info, basemap, data layers,
//! finalize. Bad input re-prompts; only end of input aborts.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::{default_display_label, placeholder_icon, SourceImage};
use crate::error::ProjectError;
use crate::model::{
    is_valid_slug, slugify, Basemap, ColorSpec, DataLayer, ProjectInfo, ProjectManifest, SubLayer, TimeFormat, TimeKey,
    MAX_YEAR, MIN_YEAR, SCHEMA_VERSION,
};
use crate::project::{
    basemap_asset, deep_validate, icon_asset, is_empty_dir, layer_asset, save_project, sublayer_file_name,
    LoadedProject,
};

#[derive(Debug, Error)]
pub enum WizardError {
    #[error("input ended before the project was saved")]
    EndOfInput,
    #[error("terminal I/O: {0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Project(#[from] ProjectError),
}

type Result<T> = std::result::Result<T, WizardError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Step {
    ProjectInfo,
    Basemap,
    Layers,
    Finalize,
}

impl Step {
    fn heading(self) -> &'static str {
        match self {
            Step::ProjectInfo => "Step 1 of 4: Project information",
            Step::Basemap => "Step 2 of 4: Basemap",
            Step::Layers => "Step 3 of 4: Data layers",
            Step::Finalize => "Step 4 of 4: Finalize",
        }
    }
}

/// Draft state between prompts. Assets are held as validated bytes keyed
/// by their final relative path.
struct AuthoringSession {
    info: Option<ProjectInfo>,
    basemap: Option<Basemap>,
    layers: Vec<DataLayer>,
    staged: BTreeMap<String, Vec<u8>>,
}

impl AuthoringSession {
    fn manifest(&self) -> Option<ProjectManifest> {
        Some(ProjectManifest {
            schema_version: SCHEMA_VERSION,
            project: self.info.clone()?,
            basemap: self.basemap.clone()?,
            layers: self.layers.clone(),
        })
    }

    fn remove_layer(&mut self, id: &str) -> bool {
        let Some(pos) = self.layers.iter().position(|l| l.id == id) else {
            return false;
        };
        let layer = self.layers.remove(pos);
        for path in layer.referenced_paths() {
            self.staged.remove(path);
        }
        true
    }

    fn summary(&self) -> String {
        let mut s = String::from("-- Project summary --\n");
        match &self.info {
            Some(info) => s.push_str(&format!("Project: {}\n", info.name)),
            None => s.push_str("Project: (not set)\n"),
        }
        match &self.basemap {
            Some(b) => s.push_str(&format!("Basemap: {} ({})\n", b.name, b.image)),
            None => s.push_str("Basemap: (not set)\n"),
        }
        if self.layers.is_empty() {
            s.push_str("Layers: none\n");
        } else {
            s.push_str("Layers:\n");
            for layer in &self.layers {
                let keys: Vec<String> = layer.sublayers.iter().map(|sub| sub.display_label.clone()).collect();
                s.push_str(&format!(
                    "  {} ({}) {} {}: {}\n",
                    layer.name,
                    layer.id,
                    layer.color,
                    layer.time_format,
                    keys.join(", ")
                ));
            }
        }
        s
    }
}

struct Prompter<R, W> {
    input: R,
    out: W,
}

impl<R: BufRead, W: Write> Prompter<R, W> {
    fn say(&mut self, text: impl AsRef<str>) -> Result<()> {
        writeln!(self.out, "{}", text.as_ref())?;
        Ok(())
    }

    fn ask(&mut self, prompt: &str) -> Result<String> {
        write!(self.out, "{prompt}: ")?;
        self.out.flush()?;
        let mut line = String::new();
        if self.input.read_line(&mut line)? == 0 {
            return Err(WizardError::EndOfInput);
        }
        Ok(line.trim_end_matches(['\n', '\r']).to_string())
    }

    /// Ask until `parse` accepts the answer, printing its complaint each time.
    fn ask_until<T>(
        &mut self,
        prompt: &str,
        mut parse: impl FnMut(&str) -> std::result::Result<T, String>,
    ) -> Result<T> {
        loop {
            let answer = self.ask(prompt)?;
            match parse(answer.trim()) {
                Ok(value) => return Ok(value),
                Err(complaint) => self.say(complaint)?,
            }
        }
    }

    fn ask_text(&mut self, prompt: &str, current: Option<&str>, required: bool) -> Result<String> {
        let prompt = match current {
            Some(c) if !c.is_empty() => format!("{prompt} [{c}]"),
            _ => prompt.to_string(),
        };
        self.ask_until(&prompt, |answer| match (answer, current) {
            ("", Some(c)) => Ok(c.to_string()),
            ("", None) if required => Err("A value is required.".into()),
            (a, _) => Ok(a.to_string()),
        })
    }

    fn ask_yes_no(&mut self, prompt: &str) -> Result<bool> {
        self.ask_until(&format!("{prompt} [y/n]"), |a| match a.to_ascii_lowercase().as_str() {
            "y" | "yes" => Ok(true),
            "n" | "no" => Ok(false),
            _ => Err("Please answer y or n.".into()),
        })
    }

    fn ask_image(&mut self, prompt: &str, optional: bool) -> Result<Option<SourceImage>> {
        self.ask_until(prompt, |answer| {
            if answer.is_empty() {
                return if optional {
                    Ok(None)
                } else {
                    Err("An image path is required.".into())
                };
            }
            let path = Path::new(answer);
            if !path.is_file() {
                return Err(format!("File not found: {answer}"));
            }
            let bytes = std::fs::read(path).map_err(|e| format!("Cannot read {answer}: {e}"))?;
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("image");
            SourceImage::from_bytes(bytes, stem)
                .map(Some)
                .map_err(|reason| format!("Not a usable PNG or JPEG image ({reason})."))
        })
    }
}

fn parse_number(answer: &str, lo: u32, hi: u32, what: &str) -> std::result::Result<u32, String> {
    answer
        .parse::<u32>()
        .ok()
        .filter(|n| (lo..=hi).contains(n))
        .ok_or_else(|| format!("Enter a {what} between {lo} and {hi}."))
}

fn project_info_step<R: BufRead, W: Write>(p: &mut Prompter<R, W>, s: &mut AuthoringSession) -> Result<()> {
    let current = s.info.clone();
    let name = p.ask_text("Project name", current.as_ref().map(|i| i.name.as_str()), true)?;
    let description = p.ask_text(
        "Project description (optional)",
        current.as_ref().map(|i| i.description.as_str()),
        false,
    )?;
    s.info = Some(ProjectInfo { name, description });
    Ok(())
}

fn basemap_step<R: BufRead, W: Write>(p: &mut Prompter<R, W>, s: &mut AuthoringSession) -> Result<()> {
    let current = s.basemap.clone();
    let name = p.ask_text("Basemap name", current.as_ref().map(|b| b.name.as_str()), true)?;
    let description = p.ask_text(
        "Basemap description (optional)",
        current.as_ref().map(|b| b.description.as_str()),
        false,
    )?;
    let keep = current.is_some();
    let prompt = if keep {
        "Basemap image path (blank keeps current)"
    } else {
        "Basemap image path"
    };
    let image = match p.ask_image(prompt, keep)? {
        Some(img) => {
            if let Some(old) = &current {
                s.staged.remove(&old.image);
            }
            let rel = basemap_asset(&img.file_name());
            s.staged.insert(rel.clone(), img.bytes);
            rel
        }
        None => current.expect("blank only allowed with a current basemap").image,
    };
    s.basemap = Some(Basemap {
        name,
        description,
        image,
    });
    Ok(())
}

fn ask_key<R: BufRead, W: Write>(p: &mut Prompter<R, W>, format: TimeFormat, existing: &[SubLayer]) -> Result<TimeKey> {
    loop {
        let key = match format {
            TimeFormat::None => TimeKey::None {
                label: p.ask_text("  Sublayer label", None, true)?,
            },
            TimeFormat::Month => TimeKey::Month {
                month: p.ask_until("  Month (1-12)", |a| parse_number(a, 1, 12, "month"))?,
            },
            TimeFormat::Year => TimeKey::Year {
                year: p.ask_until(&format!("  Year ({MIN_YEAR}-{MAX_YEAR})"), |a| {
                    parse_number(a, MIN_YEAR, MAX_YEAR, "year")
                })?,
            },
            TimeFormat::YearMonth => {
                let year = p.ask_until(&format!("  Year ({MIN_YEAR}-{MAX_YEAR})"), |a| {
                    parse_number(a, MIN_YEAR, MAX_YEAR, "year")
                })?;
                let month = p.ask_until("  Month (1-12)", |a| parse_number(a, 1, 12, "month"))?;
                TimeKey::YearMonth { year, month }
            }
        };
        if existing.iter().any(|s| s.key == key) {
            p.say(format!(
                "  This layer already has a sublayer for {}.",
                default_display_label(&key)
            ))?;
            continue;
        }
        return Ok(key);
    }
}

fn layer_entry<R: BufRead, W: Write>(p: &mut Prompter<R, W>, s: &mut AuthoringSession) -> Result<()> {
    let name = p.ask_text("Layer name", None, true)?;
    let suggested = slugify(&name);
    let taken: Vec<String> = s.layers.iter().map(|l| l.id.clone()).collect();
    let id = p.ask_until(&format!("Layer id [{suggested}]"), |a| {
        let id = if a.is_empty() { suggested.clone() } else { a.to_string() };
        if !is_valid_slug(&id) {
            Err("Ids use lowercase letters, digits and hyphens only.".into())
        } else if taken.contains(&id) {
            Err(format!("A layer with id {id} already exists."))
        } else {
            Ok(id)
        }
    })?;
    let description = p.ask_text("Description (optional)", None, false)?;
    let credit = p.ask_text("Credit / source (optional)", None, false)?;
    let icon_image = p
        .ask_image("Icon image path (blank for the default icon)", true)?
        .unwrap_or_else(placeholder_icon);
    let color = p.ask_until("Color (#RRGGBB)", |a| {
        ColorSpec::parse(a).ok_or_else(|| "Color must be in the form #RRGGBB, e.g. #E2583E.".into())
    })?;
    let time_format = p.ask_until("Time format (none, month, year, year_month)", |a| {
        TimeFormat::parse(a).ok_or_else(|| "Choose one of: none, month, year, year_month.".into())
    })?;

    let mut new_assets = BTreeMap::new();
    let icon = icon_asset(&format!("{id}.{}", icon_image.extension()));
    new_assets.insert(icon.clone(), icon_image.bytes);

    let mut layer = DataLayer {
        id: id.clone(),
        name,
        description,
        credit,
        icon,
        color,
        time_format,
        sublayers: Vec::new(),
    };
    loop {
        let prompt = format!("Add a sublayer? ({} so far)", layer.sublayers.len());
        if !p.ask_yes_no(&prompt)? {
            if layer.sublayers.is_empty() {
                p.say("At least one sublayer is required for each data layer.")?;
                continue;
            }
            break;
        }
        let key = ask_key(p, time_format, &layer.sublayers)?;
        let image = p.ask_image("  Image path", false)?.expect("required image");
        let mut rel = layer_asset(&id, &sublayer_file_name(&key, image.extension()));
        let mut n = 2;
        while new_assets.contains_key(&rel) {
            let stem = sublayer_file_name(&key, "x");
            rel = layer_asset(
                &id,
                &format!("{}-{n}.{}", stem.trim_end_matches(".x"), image.extension()),
            );
            n += 1;
        }
        let default_label = default_display_label(&key);
        let display_label = p.ask_text("  Display label", Some(&default_label), true)?;
        new_assets.insert(rel.clone(), image.bytes);
        layer.insert_sublayer(SubLayer {
            key,
            display_label,
            image: rel,
        });
    }
    s.staged.extend(new_assets);
    s.layers.push(layer);
    Ok(())
}

fn layers_step<R: BufRead, W: Write>(p: &mut Prompter<R, W>, s: &mut AuthoringSession) -> Result<()> {
    loop {
        let answer = p.ask("Layer action (add, remove <id>, done)")?;
        let answer = answer.trim();
        match answer
            .split_once(' ')
            .map(|(a, b)| (a, b.trim()))
            .unwrap_or((answer, ""))
        {
            ("add", "") => {
                layer_entry(p, s)?;
                p.say(s.summary())?;
            }
            ("remove", id) if !id.is_empty() => {
                if s.remove_layer(id) {
                    p.say(format!("Removed layer {id}."))?;
                } else {
                    p.say(format!("No layer with id {id}."))?;
                }
            }
            ("done", "") => return Ok(()),
            _ => p.say("Type add, remove <id>, or done.")?,
        }
    }
}

fn finalize_step<R: BufRead, W: Write>(p: &mut Prompter<R, W>, s: &AuthoringSession) -> Result<Option<LoadedProject>> {
    let manifest = s.manifest().expect("earlier steps completed");
    let dest: PathBuf = p.ask_until("Destination folder", |a| {
        if a.is_empty() {
            return Err("A destination folder is required.".into());
        }
        let path = PathBuf::from(a);
        if path.exists() && !(path.is_dir() && is_empty_dir(&path).unwrap_or(false)) {
            return Err(format!("{a} already exists and is not an empty folder."));
        }
        Ok(path)
    })?;
    match save_project(&manifest, &s.staged, &dest) {
        Ok(project) => {
            p.say(format!("Saved project to {}", dest.display()))?;
            let report = deep_validate(&dest)?;
            p.say(report.to_string())?;
            Ok(Some(project))
        }
        Err(ProjectError::DestinationNotEmpty(path)) => {
            p.say(format!("{} is not empty; choose another folder.", path.display()))?;
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

/// Drive the authoring wizard over arbitrary line input. Returns the saved,
/// validated project.
pub fn run_wizard<R: BufRead, W: Write>(input: R, output: W) -> Result<LoadedProject> {
    let mut p = Prompter { input, out: output };
    let mut s = AuthoringSession {
        info: None,
        basemap: None,
        layers: Vec::new(),
        staged: BTreeMap::new(),
    };
    let mut step = Step::ProjectInfo;
    loop {
        p.say(format!("== {} ==", step.heading()))?;
        step = match step {
            Step::ProjectInfo => {
                project_info_step(&mut p, &mut s)?;
                Step::Basemap
            }
            Step::Basemap => {
                basemap_step(&mut p, &mut s)?;
                Step::Layers
            }
            Step::Layers => {
                layers_step(&mut p, &mut s)?;
                Step::Finalize
            }
            Step::Finalize => {
                let choice = p.ask_until("Next (save, project, basemap, layers) [save]", |a| match a {
                    "" | "save" => Ok(Step::Finalize),
                    "project" => Ok(Step::ProjectInfo),
                    "basemap" => Ok(Step::Basemap),
                    "layers" => Ok(Step::Layers),
                    _ => Err("Choose save, project, basemap or layers.".into()),
                })?;
                if choice != Step::Finalize {
                    // Revisit, then come straight back here.
                    p.say(format!("== {} ==", choice.heading()))?;
                    match choice {
                        Step::ProjectInfo => project_info_step(&mut p, &mut s)?,
                        Step::Basemap => basemap_step(&mut p, &mut s)?,
                        _ => layers_step(&mut p, &mut s)?,
                    }
                    p.say(s.summary())?;
                    continue;
                }
                if let Some(project) = finalize_step(&mut p, &s)? {
                    return Ok(project);
                }
                Step::Finalize
            }
        };
        if step != Step::ProjectInfo {
            p.say(s.summary())?;
        }
    }
}
