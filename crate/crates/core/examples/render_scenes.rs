//! Render the three demo scenes to PNG files.
//!
//! cargo run --example render_scenes -- [OUT_DIR]

use std::path::PathBuf;

use makawalu::compositor::render_to_file;
use makawalu::demo::write_oahu_demo;
use makawalu::state::showing;
use makawalu::TimeKey;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tmp = tempfile::tempdir()?;
    let out_dir = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir)?;
    let project = write_oahu_demo(tmp.path().join("oahu"))?;

    let scenes = [
        ("wildfire-2000", "wildfire", TimeKey::Year { year: 2000 }),
        ("solar-june", "solar", TimeKey::Month { month: 6 }),
        (
            "agriculture-2000-01",
            "agriculture",
            TimeKey::YearMonth { year: 2000, month: 1 },
        ),
    ];
    for (name, layer, key) in scenes {
        let state = showing(&project.manifest, layer, &[key], None)?;
        let path = render_to_file(&project, &state, 480, 320, out_dir.join(format!("{name}.png")))?;
        println!("{}", path.display());
    }
    Ok(())
}
