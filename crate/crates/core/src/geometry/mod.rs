//! Quadrilaterals, binary masks, adaptive text blocks and bilinear resampling.

mod block;
mod mask;
pub(crate) mod quad;
mod resample;

pub use block::{
    block_side, crop_resize, make_block, paste_back, remap_quad, BlockPolicy, Direction,
    PixelOrigin, TextBlock, BLOCK_CANVAS, DEFAULT_MIN_SIDE,
};
pub use mask::Mask;
pub use quad::{min_enclosing_rect, Point, Quad, RectWH};
pub use resample::{resize_bilinear, resample_window, sample_bilinear};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub(crate) use resample::to_u8 as resample_to_u8;
