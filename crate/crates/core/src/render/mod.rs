//! Text rendering into a 512x512 block: a classical alpha blender built in,
//! or a remote service speaking the JSON render protocol.

mod builtin;
mod remote;
pub mod wire;

pub use builtin::{choose_text_color, luminance, render_builtin, BuiltinStyle};
pub use remote::{render_remote, RemoteRenderer};

use image::RgbImage;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Quad, BLOCK_CANVAS};
use crate::glyph::{ConditionSet, GlyphError};
use crate::http::HttpError;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("invalid render request: {0}")]
    InvalidRequest(String),
    #[error("render request timed out")]
    Timeout,
    #[error("render transport failure: {0}")]
    Transport(String),
    #[error("render service error (status {status}): {message}")]
    RemoteStatus { status: u16, message: String },
    #[error("malformed render response: {0}")]
    Malformed(String),
    #[error(transparent)]
    Glyph(#[from] GlyphError),
}

impl From<HttpError> for RenderError {
    fn from(e: HttpError) -> Self {
        match e {
            HttpError::Timeout => RenderError::Timeout,
            HttpError::Transport(m) => RenderError::Transport(m),
            HttpError::Status { status, message } => RenderError::RemoteStatus { status, message },
            HttpError::Malformed(m) => RenderError::Malformed(m),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RenderRequest {
    pub conditions: ConditionSet,
    /// The unmasked block; the built-in blender composites onto it.
    pub source_block: RgbImage,
    pub target_quad: Quad,
    pub transcript: String,
    pub request_id: String,
    pub deadline_ms: u64,
}

impl RenderRequest {
    pub fn new(
        conditions: ConditionSet,
        source_block: RgbImage,
        target_quad: Quad,
        request_id: impl Into<String>,
        deadline_ms: u64,
    ) -> Result<Self, RenderError> {
        if source_block.dimensions() != (BLOCK_CANVAS, BLOCK_CANVAS) {
            return Err(RenderError::InvalidRequest(format!(
                "source block must be {BLOCK_CANVAS}x{BLOCK_CANVAS}"
            )));
        }
        Ok(Self {
            transcript: conditions.glyph.transcript.clone(),
            conditions,
            source_block,
            target_quad,
            request_id: request_id.into(),
            deadline_ms,
        })
    }

    fn validate(&self) -> Result<(), RenderError> {
        if self.transcript != self.conditions.glyph.transcript {
            return Err(RenderError::InvalidRequest(
                "transcript differs from the glyph condition".into(),
            ));
        }
        if self.source_block.dimensions() != (BLOCK_CANVAS, BLOCK_CANVAS) {
            return Err(RenderError::InvalidRequest("source block has wrong size".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RendererTag {
    #[serde(rename = "built-in")]
    BuiltIn,
    #[serde(rename = "remote")]
    Remote,
}

impl std::fmt::Display for RendererTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RendererTag::BuiltIn => "built-in",
            RendererTag::Remote => "remote",
        })
    }
}

#[derive(Debug, Clone)]
pub struct RenderResult {
    pub rendered_block: RgbImage,
    pub renderer_tag: RendererTag,
    pub latency_ms: u64,
}

/// Either renderer behind one call.
#[derive(Debug, Clone)]
pub enum Renderer {
    BuiltIn(BuiltinStyle),
    Remote(RemoteRenderer),
}

impl Renderer {
    pub fn render(&self, req: &RenderRequest) -> Result<RenderResult, RenderError> {
        match self {
            Renderer::BuiltIn(style) => render_builtin(req, style),
            Renderer::Remote(r) => r.render(req),
        }
    }
}
