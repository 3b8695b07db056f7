//! Feed the interactive wizard a canned answer script and show its
//! transcript. Run `makawalu wizard` for the real thing.
//!
//! cargo run --example wizard_script

use makawalu::author::run_wizard;
use makawalu::compositor::encode_png;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tmp = tempfile::tempdir()?;
    let image = |name: &str, rgba: [u8; 4]| -> std::io::Result<String> {
        let path = tmp.path().join(name);
        std::fs::write(&path, encode_png(8, 8, &rgba.repeat(64)).expect("encode"))?;
        Ok(path.display().to_string())
    };
    let base = image("base.png", [30, 90, 60, 255])?;
    let june = image("june.png", [250, 200, 40, 160])?;
    let dest = tmp.path().join("deck");

    let answers = [
        "Solar season",
        "",
        "Satellite",
        "",
        &base,
        "add",
        "Solar",
        "",
        "",
        "",
        "",
        "purple",
        "#F5C242",
        "month",
        "y",
        "13",
        "6",
        &june,
        "",
        "n",
        "done",
        "save",
        &dest.display().to_string(),
    ];
    let mut transcript = Vec::new();
    let project = run_wizard((answers.join("\n") + "\n").as_bytes(), &mut transcript)?;
    println!("{}", String::from_utf8_lossy(&transcript));
    println!(
        "saved {} layer(s) to {}",
        project.manifest.layers.len(),
        project.root.display()
    );
    Ok(())
}
