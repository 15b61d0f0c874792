use image::{GrayImage, Luma, Rgb, RgbImage};

use super::{quad_homography, warp_glyph, GlyphError, GlyphImage, WarpedGlyph};
use crate::geometry::{resize_bilinear, Mask, Quad, RectWH, BLOCK_CANVAS};

/// Fill written into the text region of the masked block.
pub const MASK_FILL: Rgb<u8> = Rgb([128, 128, 128]);

/// The conditioning planes for rendering one text instance in a block.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionSet {
    /// Block with the word region replaced by [`MASK_FILL`].
    pub masked_block: RgbImage,
    /// 255 inside the word quad, 0 elsewhere.
    pub word_mask: GrayImage,
    /// Character class labels (see [`super::CHAR_CLASSES`]), 0 = background.
    pub char_seg_mask: GrayImage,
    pub glyph: GlyphImage,
    /// Whole text-free background resized to the canvas.
    pub background_ref: RgbImage,
}

impl ConditionSet {
    pub fn word_mask_bits(&self) -> Mask {
        Mask::from_gray(&self.word_mask)
    }
}

/// Warps `glyph` onto `quad` in a 512x512 canvas.
pub(crate) fn warp_into_quad(glyph: &GlyphImage, quad: &Quad) -> Result<WarpedGlyph, GlyphError> {
    let src = RectWH::new(
        0.0,
        0.0,
        glyph.canvas.width() as f64,
        glyph.canvas.height() as f64,
    )?;
    let h = quad_homography(&src, quad)?;
    Ok(warp_glyph(glyph, &h, (BLOCK_CANVAS, BLOCK_CANVAS)))
}

pub fn build_condition_set(
    block_image: &RgbImage,
    quad_in_block: &Quad,
    glyph: &GlyphImage,
    background_full: &RgbImage,
) -> Result<ConditionSet, GlyphError> {
    let n = BLOCK_CANVAS;
    if block_image.dimensions() != (n, n) {
        return Err(GlyphError::InvalidArgument(format!(
            "block image must be {n}x{n}, got {}x{}",
            block_image.width(),
            block_image.height()
        )));
    }
    if !quad_in_block.within(n as f64, n as f64) {
        return Err(GlyphError::InvalidArgument(format!(
            "quad {:?} lies outside the {n}x{n} block canvas",
            quad_in_block.coords()
        )));
    }
    if background_full.width() == 0 || background_full.height() == 0 {
        return Err(GlyphError::InvalidArgument("empty background image".into()));
    }

    let mask = Mask::from_quad(n, n, quad_in_block);
    let mut masked_block = block_image.clone();
    for (x, y) in mask.iter_set() {
        masked_block.put_pixel(x, y, MASK_FILL);
    }
    let warped = warp_into_quad(glyph, quad_in_block)?;
    let char_seg_mask = GrayImage::from_fn(n, n, |x, y| {
        if mask.get(x, y) {
            *warped.labels.get_pixel(x, y)
        } else {
            Luma([0])
        }
    });

    Ok(ConditionSet {
        masked_block,
        word_mask: mask.to_gray(),
        char_seg_mask,
        glyph: glyph.clone(),
        background_ref: resize_bilinear(background_full, n, n),
    })
}
