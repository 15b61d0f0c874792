use std::path::{Path, PathBuf};
use std::sync::Arc;

use ab_glyph::{Font, FontVec, PxScale, ScaleFont};

use super::GlyphError;

/// Coverage bitmap of one character laid out on a line of `line_height`
/// pixels. `left`/`top` offset the bitmap from the pen position and the
/// top of the line.
#[derive(Debug, Clone)]
pub struct CharRaster {
    pub advance: f64,
    pub left: i32,
    pub top: i32,
    pub width: u32,
    pub height: u32,
    /// Row-major coverage, 255 = full ink.
    pub coverage: Vec<u8>,
}

pub trait FontResource: Send + Sync {
    fn name(&self) -> &str;

    /// Rasterizes `ch` for a line of `line_height` pixels.
    fn render_char(&self, ch: char, line_height: u32) -> Result<CharRaster, GlyphError>;
}

/// The built-in 8x8 bitmap font, area-sampled to the requested height.
/// Needs no font files, so output is identical on every machine.
#[derive(Debug, Default, Clone, Copy)]
pub struct BitmapFont;

const SUPERSAMPLE: u32 = 4;

impl FontResource for BitmapFont {
    fn name(&self) -> &str {
        "builtin-8x8"
    }

    fn render_char(&self, ch: char, line_height: u32) -> Result<CharRaster, GlyphError> {
        use font8x8::UnicodeFonts;
        if !(' '..='~').contains(&ch) {
            return Err(GlyphError::UnsupportedChar(ch));
        }
        let rows = font8x8::BASIC_FONTS
            .get(ch)
            .ok_or(GlyphError::UnsupportedChar(ch))?;
        let scale = line_height as f64 / 8.0;
        let size = line_height;
        let mut coverage = vec![0u8; (size * size) as usize];
        let n = SUPERSAMPLE * SUPERSAMPLE;
        for y in 0..size {
            for x in 0..size {
                let mut hits = 0;
                for sy in 0..SUPERSAMPLE {
                    for sx in 0..SUPERSAMPLE {
                        let fx = (x as f64 + (sx as f64 + 0.5) / SUPERSAMPLE as f64) / scale;
                        let fy = (y as f64 + (sy as f64 + 0.5) / SUPERSAMPLE as f64) / scale;
                        let (bx, by) = (fx as usize, fy as usize);
                        if bx < 8 && by < 8 && rows[by] >> bx & 1 == 1 {
                            hits += 1;
                        }
                    }
                }
                coverage[(y * size + x) as usize] = ((hits * 255 + n / 2) / n) as u8;
            }
        }
        Ok(CharRaster {
            advance: size as f64,
            left: 0,
            top: 0,
            width: size,
            height: size,
            coverage,
        })
    }
}

/// A TrueType/OpenType font. The line height maps to ascent - descent.
pub struct OutlineFont {
    name: String,
    font: FontVec,
}

impl OutlineFont {
    pub fn from_bytes(name: impl Into<String>, data: Vec<u8>) -> Result<Self, GlyphError> {
        let font = FontVec::try_from_vec(data).map_err(|e| GlyphError::Font(e.to_string()))?;
        Ok(Self {
            name: name.into(),
            font,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, GlyphError> {
        let data = std::fs::read(path)
            .map_err(|e| GlyphError::Font(format!("{}: {e}", path.display())))?;
        let name = path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::from_bytes(name, data)
    }
}

impl FontResource for OutlineFont {
    fn name(&self) -> &str {
        &self.name
    }

    fn render_char(&self, ch: char, line_height: u32) -> Result<CharRaster, GlyphError> {
        if !(' '..='~').contains(&ch) {
            return Err(GlyphError::UnsupportedChar(ch));
        }
        let id = self.font.glyph_id(ch);
        if id.0 == 0 {
            return Err(GlyphError::UnsupportedChar(ch));
        }
        let scaled = self.font.as_scaled(PxScale::from(line_height as f32));
        let advance = scaled.h_advance(id) as f64;
        let glyph = id.with_scale_and_position(
            PxScale::from(line_height as f32),
            ab_glyph::point(0.0, scaled.ascent()),
        );
        let Some(outline) = self.font.outline_glyph(glyph) else {
            return Ok(CharRaster {
                advance,
                left: 0,
                top: 0,
                width: 0,
                height: 0,
                coverage: Vec::new(),
            });
        };
        let bounds = outline.px_bounds();
        let (w, h) = (bounds.width() as u32, bounds.height() as u32);
        let mut coverage = vec![0u8; (w * h) as usize];
        outline.draw(|x, y, c| {
            if x < w && y < h {
                coverage[(y * w + x) as usize] = (c.clamp(0.0, 1.0) * 255.0).round() as u8;
            }
        });
        Ok(CharRaster {
            advance,
            left: bounds.min.x as i32,
            top: bounds.min.y as i32,
            width: w,
            height: h,
            coverage,
        })
    }
}

/// Loads every `.ttf`/`.otf` file in `dir`, sorted by file name.
pub fn load_font_dir(dir: &Path) -> Result<Vec<Arc<dyn FontResource>>, GlyphError> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| GlyphError::Font(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "ttf" | "otf"))
        })
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| OutlineFont::from_file(p).map(|f| Arc::new(f) as Arc<dyn FontResource>))
        .collect()
}
