//! The `makawalu` command line.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::author::{
    add_layer, add_sublayer, key_from_flags, scaffold_project, set_basemap, AuthorError, BasemapEdit, LayerDraft,
    NewProject, SublayerDraft,
};
use crate::author::{run_wizard, WizardError};
use crate::compositor::{render_to_file, CompositeError};
use crate::demo::write_oahu_demo;
use crate::error::ProjectError;
use crate::model::{ColorSpec, TimeFormat};
use crate::project::{deep_validate, load_project, pack, unpack, LoadedProject};
use crate::report::ValidationReport;
use crate::service::{serve, ServeError, ServeOptions};
use crate::state::{parse_time_spec, showing};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "makawalu",
    version,
    about = "Author, check, share, render and present layer decks"
)]
pub struct Cli {
    /// Project folder to operate on.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    pub project: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create a project folder with a basemap and no layers.
    New {
        #[arg(long)]
        name: String,
        #[arg(long, default_value = "")]
        description: String,
        #[arg(long, default_value = "Basemap")]
        basemap_name: String,
        #[arg(long, default_value = "")]
        basemap_description: String,
        /// Basemap raster; a plain placeholder is used when omitted.
        #[arg(long, value_name = "FILE")]
        basemap_image: Option<PathBuf>,
    },
    /// Replace basemap metadata and/or image.
    SetBasemap {
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        description: Option<String>,
        #[arg(long, value_name = "FILE")]
        image: Option<PathBuf>,
    },
    /// Add a data layer together with its first sublayer.
    AddLayer {
        #[arg(long)]
        name: String,
        /// Defaults to a slug of the name.
        #[arg(long)]
        id: Option<String>,
        #[arg(long, default_value = "")]
        description: String,
        #[arg(long, default_value = "")]
        credit: String,
        /// Toggle-button icon; a placeholder is used when omitted.
        #[arg(long, value_name = "FILE")]
        icon: Option<PathBuf>,
        /// `#RRGGBB`.
        #[arg(long)]
        color: String,
        /// none, month, year or year_month.
        #[arg(long, value_name = "FORMAT")]
        time_format: String,
        #[command(flatten)]
        sublayer: SublayerFlags,
    },
    /// Add a sublayer to an existing layer.
    AddSublayer {
        #[arg(long, value_name = "ID")]
        layer: String,
        #[command(flatten)]
        sublayer: SublayerFlags,
    },
    /// Deep-validate a project folder; exits 1 when it has errors.
    Validate {
        /// Folder to check (overrides --project).
        dir: Option<PathBuf>,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Zip a valid project for sharing.
    Pack {
        #[arg(short, long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Extract a shared zip into --project (absent or empty).
    Unpack { archive: PathBuf },
    /// Render one layer over the basemap to a PNG.
    Render {
        #[arg(long, value_name = "ID")]
        layer: String,
        /// Sublayer key: `2000`, `M06`, `2000-01`, or a label. Repeat for
        /// several labels of a static layer. Defaults to the earliest key.
        #[arg(long, value_name = "KEY")]
        time: Vec<String>,
        #[arg(long)]
        opacity: Option<f64>,
        /// Defaults to the basemap width.
        #[arg(long)]
        width: Option<u32>,
        /// Defaults to the basemap height.
        #[arg(long)]
        height: Option<u32>,
        #[arg(short, long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Serve the project to controller and display clients.
    Present {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
        /// Built controller/display UI to serve instead of the fallback pages.
        #[arg(long, value_name = "DIR")]
        ui_dir: Option<PathBuf>,
    },
    /// Build a project interactively.
    Wizard,
    /// Write the bundled synthetic O'ahu deck into --project.
    Demo,
}

#[derive(Debug, Args)]
pub struct SublayerFlags {
    #[arg(long)]
    pub year: Option<u32>,
    #[arg(long)]
    pub month: Option<u32>,
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long, value_name = "FILE")]
    pub image: PathBuf,
    /// Button text; derived from the key when omitted.
    #[arg(long)]
    pub display_label: Option<String>,
}

/// A failure with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
    pub report: Option<ValidationReport>,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
            report: None,
        }
    }
}

impl From<ProjectError> for Failure {
    fn from(e: ProjectError) -> Self {
        let code = match &e {
            ProjectError::Io { .. } => EXIT_IO,
            ProjectError::Zip(zip::result::ZipError::Io(_)) => EXIT_IO,
            _ => EXIT_INVALID,
        };
        let message = match &e {
            ProjectError::Invalid(_) => "project is invalid".to_string(),
            other => other.to_string(),
        };
        Failure {
            code,
            message,
            report: e.report().cloned(),
        }
    }
}

impl From<AuthorError> for Failure {
    fn from(e: AuthorError) -> Self {
        match e {
            AuthorError::Usage(m) => Failure::usage(m),
            AuthorError::Refused(m) => Failure {
                code: EXIT_INVALID,
                message: m,
                report: None,
            },
            AuthorError::Io { .. } => Failure {
                code: EXIT_IO,
                message: e.to_string(),
                report: None,
            },
            AuthorError::Project(p) => p.into(),
        }
    }
}

impl From<WizardError> for Failure {
    fn from(e: WizardError) -> Self {
        match e {
            WizardError::Project(p) => p.into(),
            other => Failure {
                code: EXIT_IO,
                message: other.to_string(),
                report: None,
            },
        }
    }
}

impl From<CompositeError> for Failure {
    fn from(e: CompositeError) -> Self {
        let code = match e {
            CompositeError::Io { .. } => EXIT_IO,
            CompositeError::EmptyCanvas { .. } => EXIT_USAGE,
            _ => EXIT_INVALID,
        };
        Failure {
            code,
            message: e.to_string(),
            report: None,
        }
    }
}

impl From<ServeError> for Failure {
    fn from(e: ServeError) -> Self {
        match e {
            ServeError::InvalidProject(report) => Failure {
                code: EXIT_INVALID,
                message: "refusing to present an invalid project".into(),
                report: Some(report),
            },
            ServeError::Project(p) => p.into(),
            ServeError::Bind { .. } => Failure {
                code: EXIT_IO,
                message: e.to_string(),
                report: None,
            },
        }
    }
}

type Outcome = Result<i32, Failure>;

fn parse_format(raw: &str) -> Result<TimeFormat, Failure> {
    TimeFormat::parse(raw).ok_or_else(|| {
        Failure::usage(format!(
            "unknown time format {raw:?}; use none, month, year or year_month"
        ))
    })
}

fn sublayer_draft(format: TimeFormat, flags: &SublayerFlags) -> Result<SublayerDraft, Failure> {
    Ok(SublayerDraft {
        key: key_from_flags(format, flags.year, flags.month, flags.label.as_deref())?,
        display_label: flags.display_label.clone(),
        image: flags.image.clone(),
    })
}

fn saved(out: &mut dyn Write, project: &LoadedProject) -> Outcome {
    let _ = writeln!(out, "saved {}", project.manifest_path().display());
    Ok(EXIT_OK)
}

/// Run a parsed command, writing normal output to `out`.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Outcome {
    let root = cli.project.as_path();
    match cli.command {
        Command::New {
            name,
            description,
            basemap_name,
            basemap_description,
            basemap_image,
        } => {
            let spec = NewProject {
                name,
                description,
                basemap_name,
                basemap_description,
                basemap_image,
            };
            saved(out, &scaffold_project(root, &spec)?)
        }
        Command::SetBasemap {
            name,
            description,
            image,
        } => saved(
            out,
            &set_basemap(
                root,
                &BasemapEdit {
                    name,
                    description,
                    image,
                },
            )?,
        ),
        Command::AddLayer {
            name,
            id,
            description,
            credit,
            icon,
            color,
            time_format,
            sublayer,
        } => {
            let color = ColorSpec::parse(&color)
                .ok_or_else(|| Failure::usage(format!("color {color:?} must be in the form #RRGGBB")))?;
            let time_format = parse_format(&time_format)?;
            let draft = LayerDraft {
                id,
                name,
                description,
                credit,
                icon,
                color,
                time_format,
                first_sublayer: sublayer_draft(time_format, &sublayer)?,
            };
            saved(out, &add_layer(root, &draft)?)
        }
        Command::AddSublayer { layer, sublayer } => {
            let project = load_project(root)?;
            let format = project
                .manifest
                .layer(&layer)
                .map(|l| l.time_format)
                .ok_or_else(|| Failure::usage(format!("no layer with id {layer:?}")))?;
            saved(out, &add_sublayer(root, &layer, &sublayer_draft(format, &sublayer)?)?)
        }
        Command::Validate { dir, json } => {
            let report = deep_validate(dir.as_deref().unwrap_or(root))?;
            if json {
                let _ = writeln!(
                    out,
                    "{}",
                    serde_json::to_string_pretty(&report).expect("report serializes")
                );
            } else {
                let _ = write!(out, "{report}");
            }
            Ok(if report.ok() { EXIT_OK } else { EXIT_INVALID })
        }
        Command::Pack { out: archive } => {
            let written = pack(root, &archive)?;
            let _ = writeln!(out, "packed {}", written.display());
            Ok(EXIT_OK)
        }
        Command::Unpack { archive } => {
            let dest = unpack(&archive, root)?;
            let _ = writeln!(out, "unpacked into {}", dest.display());
            Ok(EXIT_OK)
        }
        Command::Render {
            layer,
            time,
            opacity,
            width,
            height,
            out: file,
        } => render(root, &layer, &time, opacity, width, height, &file, out),
        Command::Present { bind, ui_dir } => present(root, &bind, ServeOptions { ui_dir }, out),
        Command::Wizard => {
            let stdin = io::stdin();
            run_wizard(stdin.lock(), io::stdout())?;
            Ok(EXIT_OK)
        }
        Command::Demo => saved(out, &write_oahu_demo(root)?),
    }
}

#[allow(clippy::too_many_arguments)]
fn render(
    root: &Path,
    layer_id: &str,
    times: &[String],
    opacity: Option<f64>,
    width: Option<u32>,
    height: Option<u32>,
    file: &Path,
    out: &mut dyn Write,
) -> Outcome {
    let project = load_project(root)?;
    let layer = project
        .manifest
        .layer(layer_id)
        .ok_or_else(|| Failure::usage(format!("no layer with id {layer_id:?}")))?;
    let keys = times
        .iter()
        .map(|spec| {
            parse_time_spec(layer, spec).ok_or_else(|| {
                Failure::usage(format!(
                    "{spec:?} is not a {} key of layer {layer_id:?}",
                    layer.time_format
                ))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let keys = if keys.is_empty() && layer.time_format == TimeFormat::None {
        layer.sublayers.first().map(|s| vec![s.key.clone()]).unwrap_or_default()
    } else {
        keys
    };
    let state = showing(&project.manifest, layer_id, &keys, opacity).map_err(|r| Failure::usage(r.to_string()))?;
    let base = project.asset_index.get(&project.manifest.basemap.image);
    let width = width.or(base.map(|a| a.width)).unwrap_or(1);
    let height = height.or(base.map(|a| a.height)).unwrap_or(1);
    let written = render_to_file(&project, &state, width, height, file)?;
    let _ = writeln!(out, "rendered {}x{} to {}", width, height, written.display());
    Ok(EXIT_OK)
}

fn present(root: &Path, bind: &str, options: ServeOptions, out: &mut dyn Write) -> Outcome {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure {
        code: EXIT_IO,
        message: format!("cannot start runtime: {e}"),
        report: None,
    })?;
    runtime.block_on(async {
        let running = serve(root, bind, options).await?;
        for w in running.startup_warnings() {
            let _ = writeln!(out, "warning: {w}");
        }
        let addr = running.local_addr();
        let _ = writeln!(out, "controller: http://{addr}/");
        let _ = writeln!(out, "display:    http://{addr}/display");
        let _ = out.flush();
        let _ = tokio::signal::ctrl_c().await;
        running.shutdown().await.map_err(|e| Failure {
            code: EXIT_IO,
            message: format!("server stopped: {e}"),
            report: None,
        })?;
        Ok(EXIT_OK)
    })
}

/// Parse `args`, run, report failures on stderr, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match execute(cli, &mut out) {
        Ok(code) => code,
        Err(failure) => {
            drop(out);
            if let Some(report) = &failure.report {
                eprint!("{report}");
            }
            eprintln!("error: {}", failure.message);
            failure.code
        }
    }
}
