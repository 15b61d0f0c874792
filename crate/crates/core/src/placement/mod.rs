//! Semantic-aware text placement from segmentation and depth maps.

mod maps;
mod regions;
mod sample;

pub use maps::{DepthMap, SegmentationMap, DEPTH_MAGIC};
pub use regions::{candidate_regions, fit_plane, Plane, RegionCandidate};
pub use sample::{is_planar, plane_text_angle, sample_placement, PlacementConfig, DEFAULT_ALLOWED_CLASSES};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlacementError {
    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("bad map format: {0}")]
    Format(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("degenerate plane: {0}")]
    DegeneratePlane(String),
}
