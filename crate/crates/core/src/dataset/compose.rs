use image::RgbImage;
use thiserror::Error;

use crate::geometry::{crop_resize, make_block, paste_back, remap_quad, BlockPolicy, Direction, GeometryError, Quad};
use crate::glyph::{build_condition_set, rasterize_glyph, FontResource, GlyphError};
use crate::render::{RenderError, RenderRequest, Renderer, RendererTag};

#[derive(Debug, Error)]
pub enum BlendError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Glyph(#[from] GlyphError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("quad does not fit in its text block")]
    QuadOutsideBlock,
}

const MIN_GLYPH_PX: f64 = 8.0;
const MAX_GLYPH_PX: f64 = 256.0;

/// Renders `transcript` into `quad` of `image`: block crop, conditioning,
/// render, paste back. `background_ref` is the text-free background.
#[allow(clippy::too_many_arguments)]
pub fn blend_text(
    image: &RgbImage,
    background_ref: &RgbImage,
    quad: &Quad,
    transcript: &str,
    font: &dyn FontResource,
    renderer: &Renderer,
    policy: &BlockPolicy,
    request_id: &str,
    deadline_ms: u64,
) -> Result<(RgbImage, RendererTag), BlendError> {
    let block = make_block(quad, image.dimensions(), policy)?;
    if !block.contains_quad(quad) {
        return Err(BlendError::QuadOutsideBlock);
    }
    let block_img = crop_resize(image, &block);
    let local = remap_quad(&block, quad, Direction::ImageToBlock);
    let [p1, _, _, p4] = local.reading_order();
    let glyph_h = p1.dist(p4).clamp(MIN_GLYPH_PX, MAX_GLYPH_PX).round() as u32;
    let glyph = rasterize_glyph(transcript, font, glyph_h)?;
    let conditions = build_condition_set(&block_img, &local, &glyph, background_ref)?;
    let req = RenderRequest::new(conditions, block_img, local, request_id, deadline_ms)?;
    let res = renderer.render(&req)?;
    let out = paste_back(image, &block, &res.rendered_block)?;
    Ok((out, res.renderer_tag))
}
