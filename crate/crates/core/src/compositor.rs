//! Deterministic raster composition of a [`DrawList`].
//!
//! The canvas starts opaque black. Each entry is resampled bilinearly (edge
//! clamped) through its transform, its alpha is scaled by the entry opacity,
//! and it is blended source-over on straight alpha in `f64`:
//! `out = src * a + dst * (1 - a)`. The canvas is rounded half away from
//! zero to 8 bits after every entry.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use image::RgbaImage;
use rayon::prelude::*;
use thiserror::Error;

use crate::project::{decode_image, LoadedProject};
use crate::state::{resolve_draw_list, DrawList, ElementTransform, PresenterState};

#[derive(Debug, Error)]
pub enum CompositeError {
    #[error("canvas size must be positive, got {width}x{height}")]
    EmptyCanvas { width: u32, height: u32 },
    #[error("draw entry {index} ({path}): {reason}")]
    Asset { index: usize, path: String, reason: String },
    #[error("PNG encoding failed: {0}")]
    Encode(#[from] png::EncodingError),
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Row-major RGBA8 pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Canvas {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl Canvas {
    pub fn black(width: u32, height: u32) -> Canvas {
        let mut pixels = vec![0u8; width as usize * height as usize * 4];
        for px in pixels.chunks_exact_mut(4) {
            px[3] = 255;
        }
        Canvas { width, height, pixels }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 4] {
        let i = (y as usize * self.width as usize + x as usize) * 4;
        [
            self.pixels[i],
            self.pixels[i + 1],
            self.pixels[i + 2],
            self.pixels[i + 3],
        ]
    }

    pub fn into_image(self) -> RgbaImage {
        RgbaImage::from_raw(self.width, self.height, self.pixels).expect("length matches dimensions")
    }

    pub fn to_png(&self) -> Result<Vec<u8>, png::EncodingError> {
        encode_png(self.width, self.height, &self.pixels)
    }
}

/// Supplies decoded images for draw-list paths.
pub trait AssetResolver {
    fn resolve(&self, path: &str) -> Result<RgbaImage, String>;
}

impl AssetResolver for LoadedProject {
    fn resolve(&self, path: &str) -> Result<RgbaImage, String> {
        if !self.asset_index.contains_key(path) {
            return Err("not an indexed project asset".into());
        }
        let bytes = fs::read(self.asset_path(path)).map_err(|e| e.to_string())?;
        decode_image(&bytes).map(|(_, img)| img)
    }
}

impl AssetResolver for BTreeMap<String, RgbaImage> {
    fn resolve(&self, path: &str) -> Result<RgbaImage, String> {
        self.get(path).cloned().ok_or_else(|| "no such image".into())
    }
}

impl AssetResolver for HashMap<String, RgbaImage> {
    fn resolve(&self, path: &str) -> Result<RgbaImage, String> {
        self.get(path).cloned().ok_or_else(|| "no such image".into())
    }
}

/// Encode RGBA8 as PNG with pinned encoder settings.
pub fn encode_png(width: u32, height: u32, rgba: &[u8]) -> Result<Vec<u8>, png::EncodingError> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, width, height);
        encoder.set_color(png::ColorType::Rgba);
        encoder.set_depth(png::BitDepth::Eight);
        encoder.set_compression(png::Compression::Balanced);
        encoder.set_filter(png::Filter::Adaptive);
        let mut writer = encoder.write_header()?;
        writer.write_image_data(rgba)?;
        writer.finish()?;
    }
    Ok(out)
}

fn sample_bilinear(img: &RgbaImage, sx: f64, sy: f64) -> [f64; 4] {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let x0 = sx.floor();
    let y0 = sy.floor();
    let fx = sx - x0;
    let fy = sy - y0;
    let clamp_x = |x: i64| x.clamp(0, w - 1) as u32;
    let clamp_y = |y: i64| y.clamp(0, h - 1) as u32;
    let (xa, xb) = (clamp_x(x0 as i64), clamp_x(x0 as i64 + 1));
    let (ya, yb) = (clamp_y(y0 as i64), clamp_y(y0 as i64 + 1));
    let p00 = img.get_pixel(xa, ya).0;
    let p10 = img.get_pixel(xb, ya).0;
    let p01 = img.get_pixel(xa, yb).0;
    let p11 = img.get_pixel(xb, yb).0;
    let mut out = [0.0; 4];
    for c in 0..4 {
        let top = p00[c] as f64 * (1.0 - fx) + p10[c] as f64 * fx;
        let bottom = p01[c] as f64 * (1.0 - fx) + p11[c] as f64 * fx;
        out[c] = top * (1.0 - fy) + bottom * fy;
    }
    out
}

fn to_u8(value: f64) -> u8 {
    value.round().clamp(0.0, 255.0) as u8
}

/// Blend one source image onto the canvas.
fn blend_entry(canvas: &mut Canvas, src: &RgbaImage, opacity: f64, t: &ElementTransform) {
    if opacity <= 0.0 || src.width() == 0 || src.height() == 0 {
        return;
    }
    let opacity = opacity.min(1.0);
    let (cw, ch) = (canvas.width as f64, canvas.height as f64);
    let (iw, ih) = (src.width() as f64, src.height() as f64);
    let row_len = canvas.width as usize * 4;

    canvas.pixels.par_chunks_mut(row_len).enumerate().for_each(|(y, row)| {
        let py = y as f64 + 0.5 - t.dy * ch;
        let v = (py - ch / 2.0) / t.sy + ch / 2.0;
        if !(0.0..ch).contains(&v) {
            return;
        }
        let src_y = v * ih / ch - 0.5;
        for (x, dst) in row.chunks_exact_mut(4).enumerate() {
            let px = x as f64 + 0.5 - t.dx * cw;
            let u = (px - cw / 2.0) / t.sx + cw / 2.0;
            if !(0.0..cw).contains(&u) {
                continue;
            }
            let s = sample_bilinear(src, u * iw / cw - 0.5, src_y);
            let a = s[3] / 255.0 * opacity;
            for c in 0..3 {
                dst[c] = to_u8(s[c] * a + dst[c] as f64 * (1.0 - a));
            }
            let da = dst[3] as f64 / 255.0;
            dst[3] = to_u8((a + da * (1.0 - a)) * 255.0);
        }
    });
}

/// Composite every entry, in order, onto a `width` x `height` canvas.
pub fn composite(
    draw_list: &DrawList,
    assets: &impl AssetResolver,
    width: u32,
    height: u32,
) -> Result<Canvas, CompositeError> {
    if width == 0 || height == 0 {
        return Err(CompositeError::EmptyCanvas { width, height });
    }
    let images = draw_list
        .entries
        .iter()
        .enumerate()
        .map(|(index, entry)| {
            assets.resolve(&entry.image).map_err(|reason| CompositeError::Asset {
                index,
                path: entry.image.clone(),
                reason,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut canvas = Canvas::black(width, height);
    for (entry, image) in draw_list.entries.iter().zip(&images) {
        blend_entry(&mut canvas, image, entry.opacity, &entry.transform);
    }
    Ok(canvas)
}

/// Composite the draw list of `state` and return it as PNG bytes.
pub fn render_png(
    project: &LoadedProject,
    state: &PresenterState,
    width: u32,
    height: u32,
) -> Result<Vec<u8>, CompositeError> {
    let list = resolve_draw_list(state, &project.manifest);
    Ok(composite(&list, project, width, height)?.to_png()?)
}

pub fn render_to_file(
    project: &LoadedProject,
    state: &PresenterState,
    width: u32,
    height: u32,
    out: impl AsRef<Path>,
) -> Result<PathBuf, CompositeError> {
    let out = out.as_ref();
    let bytes = render_png(project, state, width, height)?;
    fs::write(out, bytes).map_err(|source| CompositeError::Io {
        path: out.to_path_buf(),
        source,
    })?;
    Ok(out.to_path_buf())
}
