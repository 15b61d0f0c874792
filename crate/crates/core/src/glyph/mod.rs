//! Glyph rasterization, perspective warping and conditioning-plane assembly.

pub(crate) mod conditions;
mod font;
mod homography;
mod raster;
mod warp;

pub use conditions::{build_condition_set, ConditionSet, MASK_FILL};
pub use font::{load_font_dir, BitmapFont, CharRaster, FontResource, OutlineFont};
pub use homography::{quad_homography, Homography};
pub use raster::{
    char_class, class_char, rasterize_glyph, GlyphImage, PixelBox, CHAR_CLASSES, GLYPH_MARGIN,
};
pub use warp::{warp_glyph, WarpedGlyph};

use thiserror::Error;

use crate::geometry::GeometryError;

#[derive(Debug, Error)]
pub enum GlyphError {
    #[error("unsupported character {0:?} (U+{code:04X})", code = *.0 as u32)]
    UnsupportedChar(char),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("singular geometry: {0}")]
    SingularGeometry(String),
    #[error("font error: {0}")]
    Font(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
