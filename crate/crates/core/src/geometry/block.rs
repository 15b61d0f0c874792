//! Adaptive text blocks: a square crop around a text region whose side grows
//! in powers of two with the text size, resampled to a fixed 512x512 canvas.

use image::{ImageBuffer, Pixel};
use serde::{Deserialize, Serialize};

use super::resample::{pixel_from, resample_window, sample_bilinear};
use super::{min_enclosing_rect, GeometryError, Point, Quad, RectWH};

/// Side of the square rendering canvas.
pub const BLOCK_CANVAS: u32 = 512;
pub const DEFAULT_MIN_SIDE: u32 = 64;

type Img<P> = ImageBuffer<P, Vec<u8>>;

/// Raw square side for a text region of integer extent `w` x `h`:
/// `2^(1 + floor(log2 m) + floor(log2 ceil(m / 64)))` with `m = max(w, h)`.
pub fn block_side(w: u32, h: u32) -> Result<u64, GeometryError> {
    if w < 1 || h < 1 {
        return Err(GeometryError::InvalidArgument(format!(
            "block extent must be at least 1x1, got {w}x{h}"
        )));
    }
    let m = w.max(h);
    let log_m = m.ilog2();
    let log_tiles = m.div_ceil(64).ilog2();
    Ok(1u64 << (1 + log_m + log_tiles))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PixelOrigin {
    pub x: u32,
    pub y: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlockPolicy {
    /// Lower clamp for the effective side.
    pub min_side: u32,
}

impl Default for BlockPolicy {
    fn default() -> Self {
        Self {
            min_side: DEFAULT_MIN_SIDE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TextBlock {
    /// Centroid of the source rectangle.
    pub center: Point,
    /// Unclamped side from [`block_side`].
    pub side_raw: u64,
    /// Side actually cropped: `clamp(side_raw, min_side, min(image w, h))`.
    pub side_effective: u32,
    pub crop_origin: PixelOrigin,
    /// Canvas pixels per image pixel (`512 / side_effective`).
    pub scale: f64,
    pub source_rect: RectWH,
    pub image_dims: (u32, u32),
}

impl TextBlock {
    /// Whether every vertex of `quad` (image coordinates) lies in the crop window.
    pub fn contains_quad(&self, quad: &Quad) -> bool {
        let (ox, oy) = (self.crop_origin.x as f64, self.crop_origin.y as f64);
        let s = self.side_effective as f64;
        quad.points()
            .iter()
            .all(|p| p.x >= ox && p.y >= oy && p.x <= ox + s && p.y <= oy + s)
    }

    fn window_contains(&self, x: u32, y: u32) -> bool {
        let (ox, oy, s) = (self.crop_origin.x, self.crop_origin.y, self.side_effective);
        x >= ox && y >= oy && x < ox + s && y < oy + s
    }
}

/// Computes the text block for a quad lying inside an image of `image_dims`.
/// A centered square that would cross a border is shifted, not shrunk.
pub fn make_block(
    quad: &Quad,
    image_dims: (u32, u32),
    policy: &BlockPolicy,
) -> Result<TextBlock, GeometryError> {
    let (iw, ih) = image_dims;
    if iw == 0 || ih == 0 {
        return Err(GeometryError::InvalidArgument("empty image".into()));
    }
    if !quad.within(iw as f64, ih as f64) {
        return Err(GeometryError::InvalidArgument(format!(
            "quad {:?} is not inside the {iw}x{ih} image",
            quad.coords()
        )));
    }
    let rect = min_enclosing_rect(quad);
    let extent = |v: f64| ((v - 1e-9).ceil().max(1.0)) as u32;
    let side_raw = block_side(extent(rect.w), extent(rect.h))?;
    let limit = iw.min(ih);
    let side = side_raw.max(policy.min_side as u64).min(limit as u64) as u32;
    let center = rect.center();
    let place = |c: f64, dim: u32| -> u32 {
        let start = (c - side as f64 / 2.0).round();
        start.clamp(0.0, (dim - side) as f64) as u32
    };
    Ok(TextBlock {
        center,
        side_raw,
        side_effective: side,
        crop_origin: PixelOrigin {
            x: place(center.x, iw),
            y: place(center.y, ih),
        },
        scale: BLOCK_CANVAS as f64 / side as f64,
        source_rect: rect,
        image_dims,
    })
}

/// Bilinear resample of the block's crop window to 512x512.
pub fn crop_resize<P: Pixel<Subpixel = u8>>(image: &Img<P>, block: &TextBlock) -> Img<P> {
    let s = block.side_effective as f64;
    resample_window(
        image,
        block.crop_origin.x as f64,
        block.crop_origin.y as f64,
        s,
        s,
        BLOCK_CANVAS,
        BLOCK_CANVAS,
    )
}

/// Writes a rendered 512x512 canvas back into the crop window.
///
/// A window pixel is replaced by the bilinear downsample of `rendered` only
/// when at least one canvas pixel with non-zero weight in its footprint
/// differs from the canvas that [`crop_resize`] produces for `original`;
/// otherwise the original pixel is kept. Pixels outside the window are
/// never touched.
pub fn paste_back<P: Pixel<Subpixel = u8> + PartialEq>(
    original: &Img<P>,
    block: &TextBlock,
    rendered: &Img<P>,
) -> Result<Img<P>, GeometryError> {
    if rendered.dimensions() != (BLOCK_CANVAS, BLOCK_CANVAS) {
        return Err(GeometryError::InvalidArgument(format!(
            "rendered block must be {BLOCK_CANVAS}x{BLOCK_CANVAS}, got {}x{}",
            rendered.width(),
            rendered.height()
        )));
    }
    if original.dimensions() != block.image_dims {
        return Err(GeometryError::InvalidArgument(
            "original image does not match the block's image dimensions".into(),
        ));
    }
    let reference = crop_resize(original, block);
    let changed: Vec<bool> = rendered
        .pixels()
        .zip(reference.pixels())
        .map(|(a, b)| a != b)
        .collect();
    let last = BLOCK_CANVAS as i64 - 1;
    let is_changed = |x: i64, y: i64| changed[(y * BLOCK_CANVAS as i64 + x) as usize];

    let mut out = original.clone();
    let (ox, oy) = (block.crop_origin.x, block.crop_origin.y);
    for y in oy..oy + block.side_effective {
        let v = ((y - oy) as f64 + 0.5) * block.scale - 0.5;
        let vc = v.clamp(0.0, last as f64);
        let (v0, fv) = (vc.floor() as i64, vc - vc.floor());
        let rows: &[i64] = if fv > 0.0 { &[v0, (v0 + 1).min(last)] } else { &[v0] };
        for x in ox..ox + block.side_effective {
            let u = ((x - ox) as f64 + 0.5) * block.scale - 0.5;
            let uc = u.clamp(0.0, last as f64);
            let (u0, fu) = (uc.floor() as i64, uc - uc.floor());
            let cols: &[i64] = if fu > 0.0 { &[u0, (u0 + 1).min(last)] } else { &[u0] };
            let touched = rows
                .iter()
                .any(|&ry| cols.iter().any(|&rx| is_changed(rx, ry)));
            if touched {
                out.put_pixel(x, y, pixel_from(sample_bilinear(rendered, u, v)));
            }
        }
    }
    debug_assert!(out
        .enumerate_pixels()
        .all(|(x, y, p)| block.window_contains(x, y) || p == original.get_pixel(x, y)));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    ImageToBlock,
    BlockToImage,
}

/// Maps a quad between image coordinates and 512x512 block-canvas coordinates.
pub fn remap_quad(block: &TextBlock, quad: &Quad, direction: Direction) -> Quad {
    let (ox, oy) = (block.crop_origin.x as f64, block.crop_origin.y as f64);
    let s = block.scale;
    match direction {
        Direction::ImageToBlock => {
            quad.map_similarity(|p| Point::new((p.x - ox) * s, (p.y - oy) * s))
        }
        Direction::BlockToImage => {
            quad.map_similarity(|p| Point::new(p.x / s + ox, p.y / s + oy))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::{Rgb, RgbImage};

    fn square(x: f64, y: f64, w: f64, h: f64) -> Quad {
        Quad::from_rect(&RectWH::new(x, y, w, h).unwrap())
    }

    #[test]
    fn block_side_spot_values() {
        assert_eq!(block_side(48, 20).unwrap(), 64);
        assert_eq!(block_side(64, 64).unwrap(), 128);
        assert_eq!(block_side(65, 10).unwrap(), 256);
        assert_eq!(block_side(200, 50).unwrap(), 1024);
        assert!(block_side(0, 5).is_err());
        assert!(block_side(5, 0).is_err());
    }

    #[test]
    fn centered_block_needs_no_clamp() {
        let b = make_block(&square(480., 480., 64., 64.), (1024, 1024), &BlockPolicy::default()).unwrap();
        assert_eq!(b.side_raw, 128);
        assert_eq!(b.side_effective, 128);
        assert_eq!(b.crop_origin, PixelOrigin { x: 448, y: 448 });
        assert_eq!(b.scale, 4.0);
    }

    #[test]
    fn large_text_clamps_to_image() {
        let b = make_block(&square(100., 200., 300., 40.), (512, 512), &BlockPolicy::default()).unwrap();
        assert_eq!(b.side_raw, 2048);
        assert_eq!(b.side_effective, 512);
        assert_eq!(b.crop_origin, PixelOrigin { x: 0, y: 0 });
    }

    #[test]
    fn border_block_is_shifted_inside() {
        // centroid (20, 20): the 64-square would start at (-12, -12)
        let b = make_block(&square(0., 0., 40., 40.), (512, 512), &BlockPolicy::default()).unwrap();
        assert_eq!(b.side_effective, 64);
        assert_eq!(b.crop_origin, PixelOrigin { x: 0, y: 0 });
        let b = make_block(&square(0., 0., 64., 64.), (512, 512), &BlockPolicy::default()).unwrap();
        assert_eq!(b.side_effective, 128);
        assert_eq!(b.crop_origin, PixelOrigin { x: 0, y: 0 });
        let b = make_block(&square(450., 480., 60., 30.), (512, 512), &BlockPolicy::default()).unwrap();
        assert_eq!(b.crop_origin, PixelOrigin { x: 448, y: 448 });
    }

    #[test]
    fn small_text_gets_min_side() {
        let b = make_block(&square(10., 10., 3., 2.), (200, 100), &BlockPolicy::default()).unwrap();
        assert_eq!(b.side_raw, 4);
        assert_eq!(b.side_effective, 64);
        let tiny = make_block(&square(1., 1., 3., 2.), (40, 30), &BlockPolicy::default()).unwrap();
        assert_eq!(tiny.side_effective, 30);
    }

    #[test]
    fn quad_outside_image_is_rejected() {
        assert!(make_block(&square(500., 0., 20., 20.), (512, 512), &BlockPolicy::default()).is_err());
    }

    #[test]
    fn side_512_crop_is_exact_copy() {
        let img = RgbImage::from_fn(600, 700, |x, y| Rgb([(x % 251) as u8, (y % 253) as u8, ((x ^ y) % 256) as u8]));
        let b = make_block(&square(50., 60., 300., 40.), (600, 700), &BlockPolicy::default()).unwrap();
        assert_eq!(b.side_effective, 600);
        let b = TextBlock { side_effective: 512, scale: 1.0, crop_origin: PixelOrigin { x: 30, y: 40 }, ..b };
        let crop = crop_resize(&img, &b);
        for (x, y, p) in crop.enumerate_pixels() {
            assert_eq!(p, img.get_pixel(x + 30, y + 40));
        }
    }

    #[test]
    fn downscale_has_canvas_shape() {
        let img = RgbImage::new(2048, 1500);
        let b = make_block(&square(100., 100., 200., 50.), (2048, 1500), &BlockPolicy::default()).unwrap();
        assert_eq!(b.side_effective, 1024);
        assert_eq!(crop_resize(&img, &b).dimensions(), (512, 512));
    }

    #[test]
    fn paste_back_rejects_wrong_canvas() {
        let img = RgbImage::new(256, 256);
        let b = make_block(&square(100., 100., 30., 10.), (256, 256), &BlockPolicy::default()).unwrap();
        assert!(paste_back(&img, &b, &RgbImage::new(256, 256)).is_err());
    }

    #[test]
    fn black_canvas_blacks_out_window_only() {
        let img = RgbImage::from_fn(300, 300, |x, y| Rgb([(x % 200 + 20) as u8, (y % 200 + 30) as u8, 90]));
        let b = make_block(&square(100., 120., 50., 20.), (300, 300), &BlockPolicy::default()).unwrap();
        let out = paste_back(&img, &b, &RgbImage::new(512, 512)).unwrap();
        for (x, y, p) in out.enumerate_pixels() {
            if b.window_contains(x, y) {
                assert_eq!(p.0, [0, 0, 0]);
            } else {
                assert_eq!(p, img.get_pixel(x, y));
            }
        }
    }

    #[test]
    fn remap_examples() {
        let img_dims = (1000, 1000);
        let b = TextBlock {
            center: Point::new(228., 228.),
            side_raw: 256,
            side_effective: 256,
            crop_origin: PixelOrigin { x: 100, y: 100 },
            scale: 2.0,
            source_rect: RectWH::new(200., 200., 56., 56.).unwrap(),
            image_dims: img_dims,
        };
        let q = square(100., 100., 256., 256.);
        let r = remap_quad(&b, &q, Direction::ImageToBlock);
        assert_eq!(r.coords(), [0., 0., 512., 0., 512., 512., 0., 512.]);
        let identity = TextBlock { crop_origin: PixelOrigin { x: 0, y: 0 }, side_effective: 512, scale: 1.0, ..b };
        assert_eq!(remap_quad(&identity, &q, Direction::ImageToBlock), q);
    }
}
