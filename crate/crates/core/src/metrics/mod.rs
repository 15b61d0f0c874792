//! Recognition accuracy, normalized edit distance and IoU-matched detection
//! precision/recall/hmean.

mod detection;
mod edit;
mod iou;

pub use detection::{detection_prf, DetMatchResult, DEFAULT_IOU_THRESHOLD};
pub use edit::{levenshtein, one_minus_ned, recognition_accuracy, RecogPair};
pub use iou::{clip_convex, convex_area, polygon_iou, polygon_iou_points};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
