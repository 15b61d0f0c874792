//! Scene-text dataset synthesis.
//!
//! The pipeline creates text-free backgrounds through external expert
//! services, picks plausible text positions from segmentation and depth
//! maps, crops an adaptive square block around every text region, builds
//! glyph/mask conditioning planes for it, renders text into the block and
//! pastes the block back. Detection and recognition metrics used to score
//! the results live in [`metrics`].

pub mod background;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod fixtures;
pub mod geometry;
pub mod glyph;
pub mod http;
pub mod imageio;
pub mod metrics;
pub mod mock;
pub mod placement;
pub mod render;

pub use geometry::{
    block_side, crop_resize, make_block, min_enclosing_rect, paste_back, remap_quad,
    BlockPolicy, Direction, GeometryError, Point, Quad, RectWH, TextBlock, BLOCK_CANVAS,
};
pub use glyph::{
    build_condition_set, quad_homography, rasterize_glyph, warp_glyph, ConditionSet, GlyphImage,
    Homography,
};
pub use metrics::{
    detection_prf, one_minus_ned, polygon_iou, recognition_accuracy, DetMatchResult, RecogPair,
};

/// Version string recorded in dataset manifests.
pub const TOOL_VERSION: &str = concat!("glyphforge ", env!("CARGO_PKG_VERSION"));
