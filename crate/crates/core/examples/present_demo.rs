//! Serve the demo project for a controller and any number of displays.
//! Stop with ctrl-c.
//!
//! cargo run --example present_demo -- [BIND]

use makawalu::demo::write_oahu_demo;
use makawalu::service::{serve, ServeOptions};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bind = std::env::args().nth(1).unwrap_or_else(|| "127.0.0.1:8080".into());
    let tmp = tempfile::tempdir()?;
    let project = write_oahu_demo(tmp.path().join("oahu"))?;
    let running = serve(&project.root, &bind, ServeOptions::default()).await?;
    let addr = running.local_addr();
    println!("controller: http://{addr}/");
    println!("display:    http://{addr}/display");
    tokio::signal::ctrl_c().await?;
    println!("final version {}", running.hub().snapshot().version);
    running.shutdown().await?;
    Ok(())
}
