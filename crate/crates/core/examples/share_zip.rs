//! Pack the demo project into a share archive and unpack it elsewhere.
//!
//! cargo run --example share_zip

use makawalu::demo::write_oahu_demo;
use makawalu::project::{deep_validate, pack, unpack};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tmp = tempfile::tempdir()?;
    let project = write_oahu_demo(tmp.path().join("oahu"))?;
    let archive = tmp.path().join("oahu.zip");
    pack(&project.root, &archive)?;
    println!("packed {} bytes", std::fs::metadata(&archive)?.len());

    let copy = unpack(&archive, tmp.path().join("received"))?;
    println!("unpacked to {}", copy.display());
    print!("{}", deep_validate(&copy)?);
    Ok(())
}
