use image::{GrayImage, Luma};
use serde::{Deserialize, Serialize};

use super::{FontResource, GlyphError};

/// Blank border kept around the ink on every side of a glyph canvas.
pub const GLYPH_MARGIN: u32 = 2;

/// Character classes for segmentation labels: printable ASCII in code
/// point order. Label `i + 1` denotes `CHAR_CLASSES[i]`; 0 is background.
pub const CHAR_CLASSES: &str = " !\"#$%&'()*+,-./0123456789:;<=>?@ABCDEFGHIJKLMNOPQRSTUVWXYZ[\\]^_`abcdefghijklmnopqrstuvwxyz{|}~";

pub fn char_class(c: char) -> Option<u8> {
    (' '..='~').contains(&c).then(|| (c as u32 - 0x1F) as u8)
}

pub fn class_char(label: u8) -> Option<char> {
    (1..=95).contains(&label).then(|| char::from(label + 0x1F))
}

/// Pixel box `[x0, x1) x [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PixelBox {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl PixelBox {
    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }

    pub fn is_empty(&self) -> bool {
        self.x1 <= self.x0 || self.y1 <= self.y0
    }
}

/// A rendered transcript: dark text (0) on a light (255) canvas, with one
/// box per character in transcript order.
#[derive(Debug, Clone, PartialEq)]
pub struct GlyphImage {
    pub canvas: GrayImage,
    pub char_boxes: Vec<PixelBox>,
    pub transcript: String,
}

impl GlyphImage {
    /// Ink coverage at a pixel (255 = full ink).
    pub fn ink(&self, x: u32, y: u32) -> u8 {
        255 - self.canvas.get_pixel(x, y)[0]
    }
}

/// Lays out `transcript` on one line of `target_height` pixels. The canvas is
/// `target_height + 2 * GLYPH_MARGIN` tall and cropped horizontally to the
/// ink extent plus the margin.
pub fn rasterize_glyph(
    transcript: &str,
    font: &dyn FontResource,
    target_height: u32,
) -> Result<GlyphImage, GlyphError> {
    if transcript.is_empty() {
        return Err(GlyphError::InvalidArgument("empty transcript".into()));
    }
    if target_height == 0 {
        return Err(GlyphError::InvalidArgument("target height must be positive".into()));
    }
    if let Some(c) = transcript.chars().find(|&c| char_class(c).is_none()) {
        return Err(GlyphError::UnsupportedChar(c));
    }

    struct Placed {
        x: i64,
        raster: super::CharRaster,
        ink: Option<(i64, i64, i64, i64)>,
        cell: (i64, i64),
    }
    let th = target_height as i64;
    let mut pen = 0.0_f64;
    let mut placed = Vec::new();
    for ch in transcript.chars() {
        let raster = font.render_char(ch, target_height)?;
        let x = pen.round() as i64 + raster.left as i64;
        let mut ink: Option<(i64, i64, i64, i64)> = None;
        for ry in 0..raster.height as i64 {
            let ly = ry + raster.top as i64;
            if !(0..th).contains(&ly) {
                continue;
            }
            for rx in 0..raster.width as i64 {
                if raster.coverage[(ry * raster.width as i64 + rx) as usize] > 0 {
                    let lx = x + rx;
                    ink = Some(match ink {
                        None => (lx, ly, lx + 1, ly + 1),
                        Some((a, b, c, d)) => (a.min(lx), b.min(ly), c.max(lx + 1), d.max(ly + 1)),
                    });
                }
            }
        }
        let cell = (pen.round() as i64, (pen + raster.advance).round() as i64);
        placed.push(Placed { x, raster, ink, cell });
        pen += placed.last().expect("just pushed").raster.advance;
    }

    let inked: Vec<_> = placed.iter().filter_map(|p| p.ink).collect();
    let (min_x, max_x) = if inked.is_empty() {
        (0, (pen.round() as i64).max(1))
    } else {
        (
            inked.iter().map(|b| b.0).min().expect("non-empty"),
            inked.iter().map(|b| b.2).max().expect("non-empty"),
        )
    };
    let m = GLYPH_MARGIN as i64;
    let width = (max_x - min_x + 2 * m) as u32;
    let height = target_height + 2 * GLYPH_MARGIN;
    let shift = m - min_x;

    let mut coverage = vec![0u8; width as usize * height as usize];
    for p in &placed {
        let r = &p.raster;
        for ry in 0..r.height as i64 {
            let ly = ry + r.top as i64;
            if !(0..th).contains(&ly) {
                continue;
            }
            for rx in 0..r.width as i64 {
                let cx = p.x + rx + shift;
                if cx < 0 || cx >= width as i64 {
                    continue;
                }
                let i = ((ly + m) * width as i64 + cx) as usize;
                coverage[i] = coverage[i].max(r.coverage[(ry * r.width as i64 + rx) as usize]);
            }
        }
    }
    let canvas = GrayImage::from_fn(width, height, |x, y| {
        Luma([255 - coverage[y as usize * width as usize + x as usize]])
    });

    let clip = |v: i64, hi: u32| v.clamp(0, hi as i64) as u32;
    let char_boxes = placed
        .iter()
        .map(|p| {
            let (x0, y0, x1, y1) = p.ink.unwrap_or((p.cell.0, 0, p.cell.1, th));
            PixelBox {
                x0: clip(x0 + shift, width),
                y0: clip(y0 + m, height),
                x1: clip(x1 + shift, width),
                y1: clip(y1 + m, height),
            }
        })
        .collect();

    Ok(GlyphImage {
        canvas,
        char_boxes,
        transcript: transcript.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glyph::BitmapFont;

    #[test]
    fn class_table_round_trips() {
        assert_eq!(CHAR_CLASSES.chars().count(), 95);
        for (i, c) in CHAR_CLASSES.chars().enumerate() {
            assert_eq!(char_class(c), Some(i as u8 + 1));
            assert_eq!(class_char(i as u8 + 1), Some(c));
        }
        assert_eq!(char_class('é'), None);
        assert_eq!(class_char(0), None);
        assert_eq!(class_char(96), None);
    }

    #[test]
    fn single_char_box_spans_ink() {
        let g = rasterize_glyph("A", &BitmapFont, 32).unwrap();
        assert_eq!(g.char_boxes.len(), 1);
        let b = g.char_boxes[0];
        let mut seen = (u32::MAX, u32::MAX, 0, 0);
        for (x, y, p) in g.canvas.enumerate_pixels() {
            if p[0] < 255 {
                seen = (seen.0.min(x), seen.1.min(y), seen.2.max(x + 1), seen.3.max(y + 1));
            }
        }
        assert_eq!((b.x0, b.y0, b.x1, b.y1), seen);
        assert_eq!(b.x0, GLYPH_MARGIN);
        assert_eq!(g.canvas.width(), b.x1 + GLYPH_MARGIN);
    }

    #[test]
    fn boxes_are_ordered() {
        let g = rasterize_glyph("AB", &BitmapFont, 24).unwrap();
        assert_eq!(g.char_boxes.len(), 2);
        assert!(g.char_boxes[0].x1 <= g.char_boxes[1].x0);
    }

    #[test]
    fn canvas_height_is_target_plus_margins() {
        let g = rasterize_glyph("hello", &BitmapFont, 32).unwrap();
        assert_eq!(g.canvas.height(), 32 + 2 * GLYPH_MARGIN);
        assert_eq!(g.char_boxes.len(), 5);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(rasterize_glyph("", &BitmapFont, 32), Err(GlyphError::InvalidArgument(_))));
        let err = rasterize_glyph("caf\u{e9}", &BitmapFont, 32).unwrap_err();
        assert!(matches!(err, GlyphError::UnsupportedChar('\u{e9}')));
        assert!(err.to_string().contains("U+00E9"));
    }

    #[test]
    fn spaces_get_cell_boxes() {
        let g = rasterize_glyph("a b", &BitmapFont, 16).unwrap();
        let space = g.char_boxes[1];
        assert!(!space.is_empty());
        assert!(g.char_boxes[0].x1 <= space.x0 && space.x1 <= g.char_boxes[2].x0 + 1);
    }

    #[test]
    fn deterministic() {
        let a = rasterize_glyph("Glyph", &BitmapFont, 40).unwrap();
        let b = rasterize_glyph("Glyph", &BitmapFont, 40).unwrap();
        assert_eq!(a, b);
    }
}
