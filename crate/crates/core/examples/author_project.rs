//! Scaffold a project, add a yearly layer and a second year, then print the
//! canonical manifest.
//!
//! cargo run --example author_project -- [DEST]

use std::path::PathBuf;

use makawalu::author::{add_layer, add_sublayer, scaffold_project, LayerDraft, NewProject, SublayerDraft};
use makawalu::compositor::encode_png;
use makawalu::{ColorSpec, TimeFormat, TimeKey};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scratch = tempfile::tempdir()?;
    let dest = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| scratch.path().join("kauai"));

    let burn = |year: u32, red: u8| -> std::io::Result<PathBuf> {
        let path = scratch.path().join(format!("burn-{year}.png"));
        let rgba: Vec<u8> = (0..16 * 16)
            .flat_map(|i| [red, 40, 20, if i % 3 == 0 { 200 } else { 0 }])
            .collect();
        std::fs::write(&path, encode_png(16, 16, &rgba).expect("encode"))?;
        Ok(path)
    };

    scaffold_project(
        &dest,
        &NewProject {
            name: "Kauai fire history".into(),
            description: "Burn scars by year".into(),
            basemap_name: "Placeholder".into(),
            basemap_description: String::new(),
            basemap_image: None,
        },
    )?;
    add_layer(
        &dest,
        &LayerDraft {
            id: None,
            name: "Burn scars".into(),
            description: "Mapped fire perimeters".into(),
            credit: "County fire records".into(),
            icon: None,
            color: ColorSpec::parse("#c0392b").expect("hex colour"),
            time_format: TimeFormat::Year,
            first_sublayer: SublayerDraft {
                key: TimeKey::Year { year: 2012 },
                display_label: None,
                image: burn(2012, 220)?,
            },
        },
    )?;
    let project = add_sublayer(
        &dest,
        "burn-scars",
        &SublayerDraft {
            key: TimeKey::Year { year: 2010 },
            display_label: Some("2010 season".into()),
            image: burn(2010, 160)?,
        },
    )?;

    println!("{}", project.canonical_manifest());
    println!("written to {}", project.root.display());
    Ok(())
}
