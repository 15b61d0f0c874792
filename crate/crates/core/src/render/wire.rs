//! JSON bodies of `POST {endpoint}/render`. Images travel as base64 PNG.

use image::RgbImage;
use serde::{Deserialize, Serialize};

use super::RenderRequest;
use crate::imageio::{gray_to_b64, rgb_to_b64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderWireRequest {
    pub request_id: String,
    pub transcript: String,
    /// Reading-order vertices in block coordinates.
    pub target_quad: [[f64; 2]; 4],
    pub deadline_ms: u64,
    pub masked_block: String,
    pub word_mask: String,
    pub char_seg_mask: String,
    pub glyph: String,
    pub background_ref: String,
}

impl From<&RenderRequest> for RenderWireRequest {
    fn from(req: &RenderRequest) -> Self {
        let c = &req.conditions;
        Self {
            request_id: req.request_id.clone(),
            transcript: req.transcript.clone(),
            target_quad: req.target_quad.reading_order().map(|p| [p.x, p.y]),
            deadline_ms: req.deadline_ms,
            masked_block: rgb_to_b64(&c.masked_block),
            word_mask: gray_to_b64(&c.word_mask),
            char_seg_mask: gray_to_b64(&c.char_seg_mask),
            glyph: gray_to_b64(&c.glyph.canvas),
            background_ref: rgb_to_b64(&c.background_ref),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderWireResponse {
    #[serde(default)]
    pub request_id: Option<String>,
    pub rendered_block: String,
    #[serde(default)]
    pub model_info: serde_json::Value,
}

impl RenderWireResponse {
    pub fn new(request_id: &str, block: &RgbImage, model_info: serde_json::Value) -> Self {
        Self {
            request_id: Some(request_id.to_string()),
            rendered_block: rgb_to_b64(block),
            model_info,
        }
    }
}
