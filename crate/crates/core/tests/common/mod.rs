#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use makawalu::compositor::encode_png;
use makawalu::demo::{oahu_demo, write_oahu_demo};
use makawalu::model::{months_of, years_of, Basemap, ColorSpec, DataLayer, ProjectInfo, SubLayer};
use makawalu::project::{encode_manifest, MANIFEST_FILE};
use makawalu::state::{Cursor, PresenterState, StateEvent};
use makawalu::{IssueCode, ProjectManifest, TimeFormat, TimeKey};
use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::Rng;
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, String>) {
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            walk(root, &path, out);
        } else {
            let rel = path.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
            out.insert(rel, sha256_hex(&fs::read(&path).unwrap()));
        }
    }
}

/// Relative path → SHA-256 of every file under `root`.
pub fn hash_tree(root: &Path) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    if root.exists() {
        walk(root, root, &mut out);
    }
    out
}

pub fn demo_folder(tmp: &Path) -> PathBuf {
    let dest = tmp.join("oahu-demo");
    write_oahu_demo(&dest).expect("demo fixture saves");
    dest
}

// ---------------------------------------------------------------- manifests

const WORDS: &[&str] = &[
    "Wildfire",
    "Solar",
    "Agriculture",
    "Government",
    "Ocean",
    "Reef",
    "Rain",
    "Lava",
    "Ahupua'a",
    "Kō",
    "Mālama",
    "Zone \"A\"",
    "tabs\tand\\slashes",
    "emoji 🌺",
];

fn text(rng: &mut StdRng, allow_empty: bool) -> String {
    if allow_empty && rng.random_bool(0.3) {
        return String::new();
    }
    let n = rng.random_range(1..=3);
    (0..n)
        .map(|_| *WORDS.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

fn random_keys(rng: &mut StdRng, format: TimeFormat) -> Vec<TimeKey> {
    let n = rng.random_range(1..=5);
    let mut keys: Vec<TimeKey> = match format {
        TimeFormat::None => {
            let mut labels = Vec::new();
            while labels.len() < n {
                let label = format!("{} {}", WORDS.choose(rng).unwrap(), labels.len());
                labels.push(label);
            }
            return labels.into_iter().map(|label| TimeKey::None { label }).collect();
        }
        TimeFormat::Month => {
            let mut months: Vec<u32> = (1..=12).collect();
            months.sort_by_key(|_| rng.random::<u32>());
            months
                .into_iter()
                .take(n)
                .map(|month| TimeKey::Month { month })
                .collect()
        }
        TimeFormat::Year => {
            let mut years = std::collections::BTreeSet::new();
            while years.len() < n {
                years.insert(rng.random_range(1..=9999));
            }
            years.into_iter().map(|year| TimeKey::Year { year }).collect()
        }
        TimeFormat::YearMonth => {
            let mut pairs = std::collections::BTreeSet::new();
            while pairs.len() < n {
                pairs.insert((rng.random_range(1990..=2030), rng.random_range(1..=12)));
            }
            pairs
                .into_iter()
                .map(|(year, month)| TimeKey::YearMonth { year, month })
                .collect()
        }
    };
    keys.sort_by_key(|k| (k.year(), k.month()));
    keys
}

fn tiny_png(rng: &mut StdRng) -> Vec<u8> {
    let (w, h) = (rng.random_range(1..=3), rng.random_range(1..=3));
    let rgba: Vec<u8> = (0..w * h * 4).map(|_| rng.random()).collect();
    encode_png(w, h, &rgba).unwrap()
}

/// A valid manifest with unusual text and every time format, plus bytes for
/// every asset it references.
pub fn random_project(rng: &mut StdRng) -> (ProjectManifest, BTreeMap<String, Vec<u8>>) {
    let mut assets = BTreeMap::new();
    let basemap = "assets/basemap/base.png".to_string();
    assets.insert(basemap.clone(), tiny_png(rng));

    let formats = [
        TimeFormat::None,
        TimeFormat::Month,
        TimeFormat::Year,
        TimeFormat::YearMonth,
    ];
    let layers = (0..rng.random_range(0..=4))
        .map(|i| {
            let id = format!("layer-{i}");
            let time_format = *formats.choose(rng).unwrap();
            let icon = format!("assets/icons/{id}.png");
            assets.insert(icon.clone(), tiny_png(rng));
            let sublayers = random_keys(rng, time_format)
                .into_iter()
                .enumerate()
                .map(|(n, key)| {
                    let image = format!("assets/layers/{id}/{n}.png");
                    assets.insert(image.clone(), tiny_png(rng));
                    SubLayer {
                        display_label: text(rng, false),
                        key,
                        image,
                    }
                })
                .collect();
            let [r, g, b]: [u8; 3] = rng.random();
            DataLayer {
                id,
                name: text(rng, false),
                description: text(rng, true),
                credit: text(rng, true),
                icon,
                color: ColorSpec::parse(&format!("#{r:02x}{g:02x}{b:02x}")).unwrap(),
                time_format,
                sublayers,
            }
        })
        .collect();

    let manifest = ProjectManifest {
        schema_version: 1,
        project: ProjectInfo {
            name: text(rng, false),
            description: text(rng, true),
        },
        basemap: Basemap {
            name: text(rng, false),
            description: text(rng, true),
            image: basemap,
        },
        layers,
    };
    (manifest, assets)
}

// ------------------------------------------------------------- fault matrix

fn edit_manifest(root: &Path, edit: impl FnOnce(&mut serde_json::Value)) {
    let path = root.join(MANIFEST_FILE);
    let mut value: serde_json::Value = serde_json::from_slice(&fs::read(&path).unwrap()).unwrap();
    edit(&mut value);
    fs::write(&path, serde_json::to_string_pretty(&value).unwrap()).unwrap();
}

fn layer_index(value: &serde_json::Value, id: &str) -> usize {
    value["layers"]
        .as_array()
        .unwrap()
        .iter()
        .position(|l| l["id"] == id)
        .unwrap()
}

/// One mutation of a valid demo folder per issue code, each expected to make
/// `deep_validate` report exactly that code.
pub type Mutation = fn(&Path);

pub fn fault_matrix() -> Vec<(IssueCode, Mutation)> {
    vec![
        (IssueCode::MissingManifest, |root| {
            fs::remove_file(root.join(MANIFEST_FILE)).unwrap()
        }),
        (IssueCode::BadJson, |root| {
            fs::write(root.join(MANIFEST_FILE), "{ not json").unwrap()
        }),
        (IssueCode::SchemaViolation, |root| {
            edit_manifest(root, |v| v["layers"][0]["color"] = "red".into())
        }),
        (IssueCode::NoSublayers, |root| {
            edit_manifest(root, |v| {
                let i = layer_index(v, "government");
                v["layers"][i]["sublayers"] = serde_json::json!([]);
            });
            fs::remove_dir_all(root.join("assets/layers/government")).unwrap();
        }),
        (IssueCode::DuplicateTimeKey, |root| {
            edit_manifest(root, |v| {
                let i = layer_index(v, "wildfire");
                v["layers"][i]["sublayers"][2]["key"] = serde_json::json!({ "year": 2000 });
            })
        }),
        (IssueCode::DanglingPath, |root| {
            fs::remove_file(root.join("assets/layers/wildfire/2000.png")).unwrap()
        }),
        (IssueCode::PathEscape, |root| {
            let i = 0;
            let inside = root.join("assets/layers/agriculture/2000-01.png");
            fs::rename(&inside, root.parent().unwrap().join("outside.png")).unwrap();
            edit_manifest(root, |v| {
                v["layers"][i]["sublayers"][0]["image"] = "../outside.png".into();
            });
        }),
        (IssueCode::UnsupportedImage, |root| {
            fs::write(root.join("assets/icons/solar.png"), b"GIF").unwrap()
        }),
        (IssueCode::DuplicateLayerId, |root| {
            edit_manifest(root, |v| {
                let layers = v["layers"].as_array_mut().unwrap();
                let copy = layers[1].clone();
                layers.push(copy);
            })
        }),
        (IssueCode::OrphanAsset, |root| {
            fs::copy(root.join("assets/icons/solar.png"), root.join("assets/unused.png")).unwrap();
        }),
    ]
}

// --------------------------------------------------------------- compositor

/// Straight-alpha source-over of one layer onto an opaque canvas, evaluated
/// directly from the definition for canvas-sized sources shifted by whole
/// pixels. `None` source pixels leave the destination untouched.
pub fn oracle_over(dst: &mut [[u8; 4]], w: usize, h: usize, src: &[[u8; 4]], opacity: f64, shift: (i64, i64)) {
    if opacity <= 0.0 {
        return;
    }
    for y in 0..h {
        for x in 0..w {
            let sx = x as i64 - shift.0;
            let sy = y as i64 - shift.1;
            if sx < 0 || sy < 0 || sx >= w as i64 || sy >= h as i64 {
                continue;
            }
            let s = src[sy as usize * w + sx as usize];
            let d = &mut dst[y * w + x];
            let a = f64::from(s[3]) / 255.0 * opacity;
            for c in 0..3 {
                let v = f64::from(s[c]) * a + f64::from(d[c]) * (1.0 - a);
                d[c] = v.round().clamp(0.0, 255.0) as u8;
            }
            let da = f64::from(d[3]) / 255.0;
            d[3] = ((a + da * (1.0 - a)) * 255.0).round().clamp(0.0, 255.0) as u8;
        }
    }
}

/// Pixels, opacity and integer shift of one stacked layer.
pub type OracleLayer = (Vec<[u8; 4]>, f64, (i64, i64));

pub fn oracle_stack(w: usize, h: usize, layers: &[OracleLayer]) -> Vec<[u8; 4]> {
    let mut canvas = vec![[0, 0, 0, 255]; w * h];
    for (src, opacity, shift) in layers {
        oracle_over(&mut canvas, w, h, src, *opacity, *shift);
    }
    canvas
}

pub fn pixels_of(img: &image::RgbaImage) -> Vec<[u8; 4]> {
    img.pixels().map(|p| p.0).collect()
}

/// Oracle render of a demo scene: basemap plus the listed demo assets at
/// their opacities, all canvas-sized with identity layout.
pub fn oracle_demo_scene(overlays: &[(&str, f64)]) -> Vec<[u8; 4]> {
    let (_, assets) = oahu_demo();
    let decode = |path: &str| pixels_of(&image::load_from_memory(&assets[path]).unwrap().to_rgba8());
    let w = makawalu::demo::DEMO_WIDTH as usize;
    let h = makawalu::demo::DEMO_HEIGHT as usize;
    let mut layers = vec![(decode("assets/basemap/oahu.png"), 1.0, (0, 0))];
    for (path, opacity) in overlays {
        layers.push((decode(path), *opacity, (0, 0)));
    }
    oracle_stack(w, h, &layers)
}

// -------------------------------------------------------------------- state

/// Random events aimed at the demo deck, mixing valid and invalid targets.
pub fn random_event(rng: &mut StdRng, manifest: &ProjectManifest) -> StateEvent {
    let mut ids: Vec<String> = manifest.layers.iter().map(|l| l.id.clone()).collect();
    ids.push("no-such-layer".into());
    let id = ids.choose(rng).unwrap().clone();
    match rng.random_range(0..10) {
        0 => StateEvent::SelectLayer { id },
        1 => StateEvent::SetLayerVisible {
            id,
            visible: rng.random(),
        },
        2 => StateEvent::ToggleSublayer {
            id,
            index: rng.random_range(0..6),
        },
        3 => StateEvent::SetMonth {
            id,
            month: rng.random_range(0..=13),
        },
        4 => StateEvent::SetYear {
            id,
            year: rng.random_range(1997..=2003),
        },
        5 => StateEvent::SetOpacity {
            id,
            value: match rng.random_range(0..4) {
                0 => f64::NAN,
                1 => rng.random_range(-1.0..2.0),
                _ => rng.random(),
            },
        },
        6 => {
            let element = if rng.random_bool(0.3) {
                makawalu::state::ElementId::Basemap
            } else {
                makawalu::state::ElementId::layer(id)
            };
            StateEvent::SetTransform(makawalu::state::ElementTransform {
                element_id: element,
                dx: rng.random_range(-0.5..0.5),
                dy: rng.random_range(-0.5..0.5),
                sx: if rng.random_bool(0.1) {
                    0.0
                } else {
                    rng.random_range(0.5..2.0)
                },
                sy: rng.random_range(0.5..2.0),
            })
        }
        7 => StateEvent::ResetLayout,
        8 => StateEvent::SetCalibrationLocked {
            flag: rng.random_bool(0.3),
        },
        _ => StateEvent::SetYear {
            id,
            year: rng.random_range(0..3),
        },
    }
}

/// Structural invariants every reachable state satisfies. Returns a
/// description of the first violation.
pub fn check_invariants(state: &PresenterState, manifest: &ProjectManifest) -> Result<(), String> {
    if let Some(sel) = &state.selected_layer {
        if manifest.layer(sel).is_none() {
            return Err(format!("selected layer {sel:?} does not exist"));
        }
    }
    if state.runtimes.len() != manifest.layers.len() {
        return Err("runtime set differs from layer set".into());
    }
    for layer in &manifest.layers {
        let rt = state
            .runtimes
            .get(&layer.id)
            .ok_or_else(|| format!("no runtime for {}", layer.id))?;
        if !(0.0..=1.0).contains(&rt.opacity) {
            return Err(format!("opacity {} of {} outside [0,1]", rt.opacity, layer.id));
        }
        let ok = match (&rt.cursor, layer.time_format) {
            (Cursor::None { active }, TimeFormat::None) => active.iter().all(|&i| i < layer.sublayers.len()),
            (Cursor::Month { month }, TimeFormat::Month) => {
                month.is_none_or(|m| months_of(layer, None).unwrap().contains(&m))
            }
            (Cursor::Year { year }, TimeFormat::Year) => year.is_none_or(|y| years_of(layer).unwrap().contains(&y)),
            (Cursor::YearMonth { year, month }, TimeFormat::YearMonth) => match (year, month) {
                (Some(y), Some(m)) => layer
                    .sublayer_for(&TimeKey::YearMonth { year: *y, month: *m })
                    .is_some(),
                (None, None) => true,
                _ => false,
            },
            _ => false,
        };
        if !ok {
            return Err(format!("cursor {:?} is not a key of layer {}", rt.cursor, layer.id));
        }
    }
    for (id, t) in &state.transforms {
        if &t.element_id != id || !(t.sx > 0.0 && t.sy > 0.0 && t.dx.is_finite() && t.dy.is_finite()) {
            return Err(format!("bad transform for {id}: {t:?}"));
        }
    }
    Ok(())
}

pub fn manifest_bytes(manifest: &ProjectManifest) -> Vec<u8> {
    encode_manifest(manifest).into_bytes()
}

// ---------------------------------------------------------------- time keys

/// Position of a key on its natural axis, computed without the library.
fn ordinal(key: &TimeKey, layer: &DataLayer) -> u64 {
    match key {
        TimeKey::Month { month } => u64::from(*month),
        TimeKey::Year { year } => u64::from(*year),
        TimeKey::YearMonth { year, month } => u64::from(*year) * 100 + u64::from(*month),
        TimeKey::None { .. } => layer.sublayers.iter().position(|s| &s.key == key).unwrap() as u64,
    }
}

/// One randomized trial of the key-order laws on a random layer: agreement
/// with the natural axis, totality, antisymmetry and transitivity over a
/// triple, and strictly increasing `years_of` / `months_of`.
pub fn time_order_trial(rng: &mut StdRng) -> Result<(), String> {
    use makawalu::model::compare_time_keys;
    use std::cmp::Ordering;

    let (manifest, _) = loop {
        let p = random_project(rng);
        if !p.0.layers.is_empty() {
            break p;
        }
    };
    let layer = manifest.layers.choose(rng).unwrap();
    let pick = |rng: &mut StdRng| layer.sublayers.choose(rng).unwrap().key.clone();
    let (a, b, c) = (pick(rng), pick(rng), pick(rng));
    let cmp = |x: &TimeKey, y: &TimeKey| compare_time_keys(x, y, layer).map_err(|e| e.to_string());

    let ab = cmp(&a, &b)?;
    if ab != ordinal(&a, layer).cmp(&ordinal(&b, layer)) {
        return Err(format!("{a} vs {b}: got {ab:?}"));
    }
    if cmp(&b, &a)? != ab.reverse() {
        return Err(format!("antisymmetry fails for {a}, {b}"));
    }
    if (ab == Ordering::Equal) != (a == b) {
        return Err(format!("equality disagrees for {a}, {b}"));
    }
    let bc = cmp(&b, &c)?;
    if ab != Ordering::Greater && bc != Ordering::Greater && cmp(&a, &c)? == Ordering::Greater {
        return Err(format!("transitivity fails for {a} <= {b} <= {c}"));
    }

    let increasing = |v: &[u32]| v.windows(2).all(|w| w[0] < w[1]);
    if matches!(layer.time_format, TimeFormat::Year | TimeFormat::YearMonth) {
        let years = years_of(layer).map_err(|e| e.to_string())?;
        if !increasing(&years) {
            return Err(format!("years_of not increasing: {years:?}"));
        }
        if layer.time_format == TimeFormat::YearMonth {
            for y in years {
                let months = months_of(layer, Some(y)).map_err(|e| e.to_string())?;
                if months.is_empty() || !increasing(&months) {
                    return Err(format!("months_of({y}) not increasing: {months:?}"));
                }
            }
        }
    }
    if layer.time_format == TimeFormat::Month {
        let months = months_of(layer, None).map_err(|e| e.to_string())?;
        if !increasing(&months) {
            return Err(format!("months_of not increasing: {months:?}"));
        }
    }
    Ok(())
}

// ------------------------------------------------------------------- fuzzing

/// Drive `count` random events through `apply_event`, checking invariants
/// after each one. Returns the event log and the final state.
pub fn fuzz_state(
    rng: &mut StdRng,
    manifest: &ProjectManifest,
    count: usize,
) -> Result<(Vec<StateEvent>, PresenterState), String> {
    use makawalu::state::{apply_event, initial_state};

    let mut state = initial_state(manifest);
    check_invariants(&state, manifest)?;
    let mut log = Vec::with_capacity(count);
    for n in 0..count {
        let event = random_event(rng, manifest);
        let before = state.encode();
        match apply_event(&state, &event, manifest) {
            Ok(next) => {
                if next.version != state.version + 1 {
                    return Err(format!("event {n}: version {} -> {}", state.version, next.version));
                }
                check_invariants(&next, manifest).map_err(|e| format!("event {n} {event:?}: {e}"))?;
                state = next;
            }
            Err(_) if state.encode() != before => {
                return Err(format!("event {n}: rejected {event:?} changed the state"));
            }
            Err(_) => {}
        }
        log.push(event);
    }
    Ok((log, state))
}

/// The demo manifest, built once per test binary.
pub fn demo_manifest() -> &'static ProjectManifest {
    static MANIFEST: std::sync::OnceLock<ProjectManifest> = std::sync::OnceLock::new();
    MANIFEST.get_or_init(|| oahu_demo().0)
}

// ------------------------------------------------------------------ goldens

pub struct GoldenScene {
    pub name: &'static str,
    pub layer: &'static str,
    pub time: &'static str,
    pub overlay: Option<&'static str>,
}

pub const GOLDEN_SCENES: [GoldenScene; 4] = [
    GoldenScene {
        name: "wildfire-2000",
        layer: "wildfire",
        time: "2000",
        overlay: Some("assets/layers/wildfire/2000.png"),
    },
    GoldenScene {
        name: "solar-june",
        layer: "solar",
        time: "M06",
        overlay: Some("assets/layers/solar/M06.png"),
    },
    GoldenScene {
        name: "agriculture-2000-01",
        layer: "agriculture",
        time: "2000-01",
        overlay: Some("assets/layers/agriculture/2000-01.png"),
    },
    GoldenScene {
        name: "basemap-only",
        layer: "",
        time: "",
        overlay: None,
    },
];

pub fn golden_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/goldens")
        .join(format!("{name}.png"))
}

/// Render a scene from the demo folder at `root`, returning PNG bytes.
pub fn render_scene(root: &Path, scene: &GoldenScene) -> Vec<u8> {
    use makawalu::compositor::render_png;
    use makawalu::project::load_project;
    use makawalu::state::{initial_state, parse_time_spec, showing};

    let project = load_project(root).unwrap();
    let state = if scene.layer.is_empty() {
        initial_state(&project.manifest)
    } else {
        let layer = project.manifest.layer(scene.layer).unwrap();
        let key = parse_time_spec(layer, scene.time).unwrap();
        showing(&project.manifest, scene.layer, &[key], None).unwrap()
    };
    render_png(
        &project,
        &state,
        makawalu::demo::DEMO_WIDTH,
        makawalu::demo::DEMO_HEIGHT,
    )
    .unwrap()
}

/// Check a rendered scene: its pixels must equal the oracle, and its bytes
/// the stored golden. With `MAKAWALU_BLESS_GOLDENS=1` an oracle-matching
/// render replaces the golden instead.
pub fn check_golden(root: &Path, scene: &GoldenScene) -> Result<(), String> {
    let png = render_scene(root, scene);
    let decoded = image::load_from_memory(&png).map_err(|e| e.to_string())?.to_rgba8();
    let overlays: Vec<(&str, f64)> = scene.overlay.iter().map(|p| (*p, 1.0)).collect();
    if pixels_of(&decoded) != oracle_demo_scene(&overlays) {
        return Err(format!("{}: render differs from the per-pixel oracle", scene.name));
    }
    let path = golden_path(scene.name);
    if std::env::var_os("MAKAWALU_BLESS_GOLDENS").is_some() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, &png).unwrap();
    }
    let golden = fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if golden != png {
        return Err(format!(
            "{}: render {} != golden {}",
            scene.name,
            sha256_hex(&png),
            sha256_hex(&golden)
        ));
    }
    Ok(())
}

/// One random 8x8 stack composited by the library and by the oracle.
pub fn compositor_trial(rng: &mut StdRng) -> Result<(), String> {
    use makawalu::compositor::composite;
    use makawalu::state::{DrawEntry, DrawList, ElementId, ElementTransform};

    const N: usize = 8;
    let mut images = BTreeMap::new();
    let mut entries = Vec::new();
    let mut oracle_layers = Vec::new();
    for i in 0..rng.random_range(1..=5) {
        let pixels: Vec<[u8; 4]> = (0..N * N)
            .map(|_| {
                let [r, g, b]: [u8; 3] = rng.random();
                let a = match rng.random_range(0..4) {
                    0 => 0,
                    1 => 255,
                    _ => rng.random(),
                };
                [r, g, b, a]
            })
            .collect();
        let opacity = match rng.random_range(0..5) {
            0 => 0.0,
            1 => 1.0,
            _ => rng.random::<f64>(),
        };
        let shift = if i > 0 && rng.random_bool(0.5) {
            (rng.random_range(-3..=3), rng.random_range(-3..=3))
        } else {
            (0, 0)
        };
        let name = format!("l{i}.png");
        let raw: Vec<u8> = pixels.iter().flatten().copied().collect();
        images.insert(
            name.clone(),
            image::RgbaImage::from_raw(N as u32, N as u32, raw).unwrap(),
        );
        entries.push(DrawEntry {
            image: name,
            opacity,
            transform: ElementTransform {
                dx: shift.0 as f64 / N as f64,
                dy: shift.1 as f64 / N as f64,
                ..ElementTransform::identity(ElementId::Basemap)
            },
        });
        oracle_layers.push((pixels, opacity, shift));
    }
    let canvas = composite(&DrawList { entries }, &images, N as u32, N as u32).map_err(|e| e.to_string())?;
    let got: Vec<[u8; 4]> = canvas
        .pixels()
        .chunks_exact(4)
        .map(|p| [p[0], p[1], p[2], p[3]])
        .collect();
    let want = oracle_stack(N, N, &oracle_layers);
    match got.iter().zip(&want).position(|(g, w)| g != w) {
        None => Ok(()),
        Some(i) => Err(format!("pixel {i}: got {:?}, oracle {:?}", got[i], want[i])),
    }
}

/// The three fixed identity cases: basemap alone, zero-opacity red over
/// white, and half-opacity red over white.
pub fn compositor_identity_cases() -> Vec<(&'static str, Result<(), String>)> {
    use makawalu::compositor::composite;
    use makawalu::state::{DrawEntry, DrawList, ElementId, ElementTransform};

    let entry = |image: &str, opacity: f64| DrawEntry {
        image: image.into(),
        opacity,
        transform: ElementTransform::identity(ElementId::Basemap),
    };
    let solid = |px: [u8; 4]| image::RgbaImage::from_pixel(5, 3, image::Rgba(px));
    let (_, demo) = oahu_demo();
    let basemap = image::load_from_memory(&demo["assets/basemap/oahu.png"])
        .unwrap()
        .to_rgba8();
    let mut images = BTreeMap::new();
    images.insert("base".to_string(), basemap.clone());
    images.insert("white".to_string(), solid([255, 255, 255, 255]));
    images.insert("red".to_string(), solid([255, 0, 0, 255]));

    let run = |entries: Vec<DrawEntry>, w: u32, h: u32| composite(&DrawList { entries }, &images, w, h).unwrap();
    let every = |c: &makawalu::compositor::Canvas, px: [u8; 4]| c.pixels().chunks_exact(4).all(|p| p == px);

    let base = run(vec![entry("base", 1.0)], basemap.width(), basemap.height());
    let zero = run(vec![entry("white", 1.0), entry("red", 0.0)], 5, 3);
    let half = run(vec![entry("white", 1.0), entry("red", 0.5)], 5, 3);
    let verdict = |ok: bool, what: &str| if ok { Ok(()) } else { Err(what.to_string()) };
    vec![
        (
            "basemap alone reproduces the basemap",
            verdict(base.pixels() == basemap.as_raw().as_slice(), "pixels differ"),
        ),
        (
            "zero opacity is a no-op",
            verdict(every(&zero, [255, 255, 255, 255]), "not all white"),
        ),
        (
            "half red over white is (255,128,128)",
            verdict(every(&half, [255, 128, 128, 255]), "not (255,128,128)"),
        ),
    ]
}

pub mod net;

/// A zip holding a stub manifest and one entry named `evil`.
pub fn malicious_zip(path: &std::path::Path, evil: &str) {
    use std::io::Write;
    let file = fs::File::create(path).unwrap();
    let mut zip = zip::ZipWriter::new(file);
    let opts = zip::write::SimpleFileOptions::default();
    zip.start_file("project.json", opts).unwrap();
    zip.write_all(b"{}").unwrap();
    zip.start_file(evil, opts).unwrap();
    zip.write_all(b"pwned").unwrap();
    zip.finish().unwrap();
}
