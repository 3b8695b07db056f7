//! Deep-validate a project folder. Without an argument, validates the demo
//! project twice: once clean, once with a sublayer image deleted.
//!
//! cargo run --example validate_folder -- [DIR]

use makawalu::demo::write_oahu_demo;
use makawalu::project::deep_validate;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    if let Some(dir) = std::env::args_os().nth(1) {
        let report = deep_validate(dir)?;
        print!("{report}");
        std::process::exit(if report.ok() { 0 } else { 1 });
    }

    let tmp = tempfile::tempdir()?;
    let project = write_oahu_demo(tmp.path().join("oahu"))?;
    print!("clean demo:\n{}", deep_validate(&project.root)?);

    std::fs::remove_file(project.asset_path("assets/layers/solar/M03.png"))?;
    std::fs::write(project.asset_path("assets/notes.png"), b"not an image")?;
    print!("\nafter damage:\n{}", deep_validate(&project.root)?);
    Ok(())
}
