//! A small synthetic O'ahu deck with one layer of each time format. All
//! rasters are generated procedurally so the fixture is reproducible.

use std::collections::BTreeMap;
use std::path::Path;

use crate::author::default_display_label;
use crate::compositor::encode_png;
use crate::error::Result;
use crate::model::{
    Basemap, ColorSpec, DataLayer, ProjectInfo, ProjectManifest, SubLayer, TimeFormat, TimeKey, SCHEMA_VERSION,
};
use crate::project::{basemap_asset, icon_asset, layer_asset, save_project, sublayer_file_name, LoadedProject};

pub const DEMO_WIDTH: u32 = 96;
pub const DEMO_HEIGHT: u32 = 64;

pub const GOVERNMENT_LABELS: [&str; 4] = ["State Land", "County Land", "Federal Land", "Hawaiian Home Lands"];

/// Agriculture keys: 2000 has January and June only.
pub const AGRICULTURE_KEYS: [(u32, u32); 4] = [(2000, 1), (2000, 6), (2001, 3), (2001, 9)];

fn island_mask(x: u32, y: u32) -> bool {
    let nx = (x as f64 + 0.5) / DEMO_WIDTH as f64 - 0.5;
    let ny = (y as f64 + 0.5) / DEMO_HEIGHT as f64 - 0.5;
    (nx / 0.42).powi(2) + (ny / 0.36).powi(2) <= 1.0
}

fn raster(width: u32, height: u32, mut shade: impl FnMut(u32, u32) -> [u8; 4]) -> Vec<u8> {
    let mut rgba = Vec::with_capacity(width as usize * height as usize * 4);
    for y in 0..height {
        for x in 0..width {
            rgba.extend_from_slice(&shade(x, y));
        }
    }
    encode_png(width, height, &rgba).expect("in-memory PNG encoding")
}

fn basemap_png() -> Vec<u8> {
    raster(DEMO_WIDTH, DEMO_HEIGHT, |x, y| {
        if island_mask(x, y) {
            let g = 90 + ((x * 3 + y * 5) % 60) as u8;
            [48, g, 40, 255]
        } else {
            [10, 40 + (y % 8) as u8 * 3, 110, 255]
        }
    })
}

fn icon_png(color: [u8; 3]) -> Vec<u8> {
    raster(16, 16, |x, y| {
        let edge = x == 0 || y == 0 || x == 15 || y == 15;
        if edge {
            [255, 255, 255, 255]
        } else {
            [color[0], color[1], color[2], 255]
        }
    })
}

/// A translucent blob whose position depends on `seed`, clipped to the island.
fn overlay_png(color: [u8; 3], seed: u32, alpha: u8) -> Vec<u8> {
    let cx = 20.0 + (seed * 17 % 56) as f64;
    let cy = 16.0 + (seed * 11 % 32) as f64;
    let r = 8.0 + (seed % 5) as f64 * 2.0;
    raster(DEMO_WIDTH, DEMO_HEIGHT, |x, y| {
        let d = ((x as f64 + 0.5 - cx).powi(2) + (y as f64 + 0.5 - cy).powi(2)).sqrt();
        if d <= r && island_mask(x, y) {
            let fade = (alpha as f64 * (1.0 - 0.5 * d / r)).round() as u8;
            [color[0], color[1], color[2], fade]
        } else {
            [0, 0, 0, 0]
        }
    })
}

struct LayerSpec {
    id: &'static str,
    name: &'static str,
    description: &'static str,
    credit: &'static str,
    color: &'static str,
    time_format: TimeFormat,
    keys: Vec<TimeKey>,
}

fn layer_specs() -> Vec<LayerSpec> {
    vec![
        LayerSpec {
            id: "agriculture",
            name: "Agriculture",
            description: "Active agricultural land use by month.",
            credit: "Hawai'i State Energy Office",
            color: "#6BBF59",
            time_format: TimeFormat::YearMonth,
            keys: AGRICULTURE_KEYS
                .iter()
                .map(|&(year, month)| TimeKey::YearMonth { year, month })
                .collect(),
        },
        LayerSpec {
            id: "wildfire",
            name: "Wildfire",
            description: "Burned area perimeters by year.",
            credit: "Hawai'i Wildfire Management Organization",
            color: "#E2583E",
            time_format: TimeFormat::Year,
            keys: (1999..=2002).map(|year| TimeKey::Year { year }).collect(),
        },
        LayerSpec {
            id: "solar",
            name: "Solar",
            description: "Average monthly solar irradiance.",
            credit: "Hawai'i State Energy Office",
            color: "#F5C242",
            time_format: TimeFormat::Month,
            keys: (1..=12).map(|month| TimeKey::Month { month }).collect(),
        },
        LayerSpec {
            id: "government",
            name: "Government",
            description: "Public land ownership.",
            credit: "State of Hawai'i Office of Planning",
            color: "#7A5BD6",
            time_format: TimeFormat::None,
            keys: GOVERNMENT_LABELS
                .iter()
                .map(|l| TimeKey::None { label: l.to_string() })
                .collect(),
        },
    ]
}

/// The demo manifest and the bytes of every asset it references.
pub fn oahu_demo() -> (ProjectManifest, BTreeMap<String, Vec<u8>>) {
    let mut assets = BTreeMap::new();
    let basemap = basemap_asset("oahu.png");
    assets.insert(basemap.clone(), basemap_png());

    let mut layers = Vec::new();
    for (layer_no, spec) in layer_specs().into_iter().enumerate() {
        let color = ColorSpec::parse(spec.color).expect("demo colors are well formed");
        let rgb = color.rgb().expect("well formed");
        let icon = icon_asset(&format!("{}.png", spec.id));
        assets.insert(icon.clone(), icon_png(rgb));

        let sublayers = spec
            .keys
            .into_iter()
            .enumerate()
            .map(|(n, key)| {
                let image = layer_asset(spec.id, &sublayer_file_name(&key, "png"));
                let seed = layer_no as u32 * 7 + n as u32 + 1;
                assets.insert(image.clone(), overlay_png(rgb, seed, 200));
                SubLayer {
                    display_label: default_display_label(&key),
                    key,
                    image,
                }
            })
            .collect();

        layers.push(DataLayer {
            id: spec.id.into(),
            name: spec.name.into(),
            description: spec.description.into(),
            credit: spec.credit.into(),
            icon,
            color,
            time_format: spec.time_format,
            sublayers,
        });
    }

    let manifest = ProjectManifest {
        schema_version: SCHEMA_VERSION,
        project: ProjectInfo {
            name: "O'ahu Demo".into(),
            description: "Land use, wildfire, solar and government layers over O'ahu.".into(),
        },
        basemap: Basemap {
            name: "O'ahu Satellite".into(),
            description: "Synthetic satellite-style basemap.".into(),
            image: basemap,
        },
        layers,
    };
    (manifest, assets)
}

/// Save the demo deck into `dest` (absent or empty).
pub fn write_oahu_demo(dest: impl AsRef<Path>) -> Result<LoadedProject> {
    let (manifest, assets) = oahu_demo();
    save_project(&manifest, &assets, dest)
}
