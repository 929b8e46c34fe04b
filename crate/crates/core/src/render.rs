//! Black-on-white rendering of scenes, as SVG text or a grayscale raster.
//!
//! Canvas units map to pixels by `x * pixels`, `y * pixels`; the origin is the
//! top-left corner in both outputs.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Coord, Primitive};
use crate::realize::Scene;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("invalid render config: {0}")]
    InvalidConfig(&'static str),
    #[error("raster values out of range")]
    InvalidRaster,
    #[error("i/o error writing {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("png encoding failed: {0}")]
    Png(#[from] image::ImageError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenderConfig {
    pub pixels: u32,
    /// Stroke width in pixels.
    pub stroke_width: f64,
    pub antialias: bool,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            pixels: 256,
            stroke_width: 2.5,
            antialias: true,
        }
    }
}

impl RenderConfig {
    pub fn validate(&self) -> Result<(), RenderError> {
        if self.pixels < 32 {
            return Err(RenderError::InvalidConfig("pixels must be at least 32"));
        }
        if !self.stroke_width.is_finite() || self.stroke_width < 1.0 {
            return Err(RenderError::InvalidConfig(
                "stroke_width must be at least 1",
            ));
        }
        Ok(())
    }
}

/// Grayscale image, row-major from the top-left; 1.0 is white, 0.0 black.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    pub width: u32,
    pub height: u32,
    pub values: Vec<f32>,
}

impl RasterImage {
    pub fn blank(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            values: vec![1.0; (width * height) as usize],
        }
    }

    pub fn get(&self, x: u32, y: u32) -> f32 {
        self.values[(y * self.width + x) as usize]
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.values
            .iter()
            .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect()
    }

    pub fn from_bytes(width: u32, height: u32, bytes: &[u8]) -> Result<Self, RenderError> {
        if bytes.len() != (width * height) as usize {
            return Err(RenderError::InvalidRaster);
        }
        Ok(Self {
            width,
            height,
            values: bytes.iter().map(|&b| b as f32 / 255.0).collect(),
        })
    }

    pub fn write_png(&self, path: &Path) -> Result<(), RenderError> {
        let img = image::GrayImage::from_raw(self.width, self.height, self.to_bytes())
            .ok_or(RenderError::InvalidRaster)?;
        img.save_with_format(path, image::ImageFormat::Png)?;
        Ok(())
    }

    pub fn read_png(path: &Path) -> Result<Self, RenderError> {
        let img = image::open(path)?.into_luma8();
        let (w, h) = img.dimensions();
        Self::from_bytes(w, h, img.as_raw())
    }

    /// Binary portable graymap (P5).
    pub fn write_pgm(&self, path: &Path) -> Result<(), RenderError> {
        let io = |source| RenderError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        write!(f, "P5\n{} {}\n255\n", self.width, self.height).map_err(io)?;
        f.write_all(&self.to_bytes()).map_err(io)?;
        f.flush().map_err(io)
    }
}

pub fn render_vector(scene: &Scene, config: &RenderConfig) -> String {
    let n = config.pixels;
    let s = n as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{n}" height="{n}" viewBox="0 0 {n} {n}">"#
    );
    let _ = writeln!(
        out,
        r#"  <rect x="0" y="0" width="{n}" height="{n}" fill="white"/>"#
    );
    let style = format!(
        r#"fill="none" stroke="black" stroke-width="{}" stroke-linecap="round""#,
        config.stroke_width
    );
    for p in &scene.primitives {
        match p.primitive {
            Primitive::Segment(seg) => {
                let _ = writeln!(
                    out,
                    r#"  <line id="{}" x1="{:.4}" y1="{:.4}" x2="{:.4}" y2="{:.4}" {style}/>"#,
                    p.name,
                    seg.a.x * s,
                    seg.a.y * s,
                    seg.b.x * s,
                    seg.b.y * s
                );
            }
            Primitive::Circle(c) => {
                let _ = writeln!(
                    out,
                    r#"  <circle id="{}" cx="{:.4}" cy="{:.4}" r="{:.4}" {style}/>"#,
                    p.name,
                    c.center.x * s,
                    c.center.y * s,
                    c.radius * s
                );
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

const SUB: u32 = 4;

/// A pixel is dark where its center (or, with antialiasing, each of a 4×4
/// grid of subsample points) lies within `stroke_width / 2` of a primitive.
pub fn rasterize(scene: &Scene, config: &RenderConfig) -> RasterImage {
    let n = config.pixels;
    let s = n as f64;
    let half = config.stroke_width / 2.0;
    let samples: Vec<(f64, f64)> = if config.antialias {
        (0..SUB * SUB)
            .map(|k| ((k % SUB) as f64 + 0.5) / SUB as f64)
            .zip((0..SUB * SUB).map(|k| ((k / SUB) as f64 + 0.5) / SUB as f64))
            .collect()
    } else {
        vec![(0.5, 0.5)]
    };
    let full: u16 = if samples.len() == 16 { u16::MAX } else { 1 };
    let mut mask = vec![0u16; (n * n) as usize];

    for p in &scene.primitives {
        let prim = scale(&p.primitive, s);
        let (lo, hi) = prim.bounds();
        let x0 = ((lo.x - half - 1.0).floor().max(0.0)) as u32;
        let y0 = ((lo.y - half - 1.0).floor().max(0.0)) as u32;
        let x1 = ((hi.x + half + 1.0).ceil().min(s)).max(0.0) as u32;
        let y1 = ((hi.y + half + 1.0).ceil().min(s)).max(0.0) as u32;
        for y in y0..y1 {
            for x in x0..x1 {
                let idx = (y * n + x) as usize;
                if mask[idx] == full {
                    continue;
                }
                // Skip pixels whose whole square is clearly outside the stroke.
                let center = Coord::new(x as f64 + 0.5, y as f64 + 0.5);
                let d = prim.distance_to(center);
                if d > half + 0.75 {
                    continue;
                }
                for (k, &(dx, dy)) in samples.iter().enumerate() {
                    if prim.distance_to(Coord::new(x as f64 + dx, y as f64 + dy)) <= half {
                        mask[idx] |= 1 << k;
                    }
                }
            }
        }
    }

    let total = samples.len() as f32;
    let values = mask
        .iter()
        .map(|m| 1.0 - m.count_ones() as f32 / total)
        .collect();
    RasterImage {
        width: n,
        height: n,
        values,
    }
}

fn scale(p: &Primitive, s: f64) -> Primitive {
    match p {
        Primitive::Segment(seg) => Primitive::segment(seg.a * s, seg.b * s),
        Primitive::Circle(c) => Primitive::circle(c.center * s, c.radius * s),
    }
}

/// Writes `<stem>.svg` and `<stem>.png` (and `<stem>.pgm` if asked) into `dir`.
pub fn write_scene(
    scene: &Scene,
    config: &RenderConfig,
    dir: &Path,
    stem: &str,
    pgm: bool,
) -> Result<RasterImage, RenderError> {
    let svg_path = dir.join(format!("{stem}.svg"));
    std::fs::write(&svg_path, render_vector(scene, config)).map_err(|source| RenderError::Io {
        path: svg_path.display().to_string(),
        source,
    })?;
    let raster = rasterize(scene, config);
    raster.write_png(&dir.join(format!("{stem}.png")))?;
    if pgm {
        raster.write_pgm(&dir.join(format!("{stem}.pgm")))?;
    }
    Ok(raster)
}
