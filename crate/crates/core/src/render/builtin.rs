use std::time::Instant;

use image::{Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use super::{RenderError, RenderRequest, RenderResult, RendererTag};
use crate::geometry::{Mask, BLOCK_CANVAS};
use crate::glyph::conditions::warp_into_quad;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BuiltinStyle {
    /// Candidate ink colors; empty means black or white only.
    pub palette: Vec<[u8; 3]>,
    /// Minimum |luminance difference| (8-bit) a palette color needs.
    pub min_contrast: f64,
    /// Width of the soft fringe added around the ink.
    pub feather_px: u32,
}

impl Default for BuiltinStyle {
    fn default() -> Self {
        Self {
            palette: Vec::new(),
            min_contrast: 60.0,
            feather_px: 1,
        }
    }
}

/// BT.601 luma.
pub fn luminance(c: [u8; 3]) -> f64 {
    0.299 * c[0] as f64 + 0.587 * c[1] as f64 + 0.114 * c[2] as f64
}

/// Palette entry closest in luminance to the background among those at
/// least `min_contrast` away; without one, black or white, whichever
/// contrasts more (ties go to black).
pub fn choose_text_color(background_luma: f64, style: &BuiltinStyle) -> [u8; 3] {
    let eligible = style
        .palette
        .iter()
        .map(|&c| (c, (luminance(c) - background_luma).abs()))
        .filter(|&(_, d)| d >= style.min_contrast)
        .min_by(|a, b| {
            a.1.partial_cmp(&b.1)
                .expect("finite")
                .then(luminance(a.0).partial_cmp(&luminance(b.0)).expect("finite"))
        });
    if let Some((c, _)) = eligible {
        return c;
    }
    if background_luma >= 255.0 - background_luma {
        [0, 0, 0]
    } else {
        [255, 255, 255]
    }
}

fn box_blur(alpha: &[f64], n: usize, r: usize) -> Vec<f64> {
    let mut tmp = vec![0.0; alpha.len()];
    let mut out = vec![0.0; alpha.len()];
    for y in 0..n {
        for x in 0..n {
            let (a, b) = (x.saturating_sub(r), (x + r).min(n - 1));
            tmp[y * n + x] = (a..=b).map(|i| alpha[y * n + i]).sum::<f64>() / (2 * r + 1) as f64;
        }
    }
    for y in 0..n {
        let (a, b) = (y.saturating_sub(r), (y + r).min(n - 1));
        for x in 0..n {
            out[y * n + x] = (a..=b).map(|j| tmp[j * n + x]).sum::<f64>() / (2 * r + 1) as f64;
        }
    }
    out
}

/// Alpha-composites the warped glyph ink onto the source block inside the
/// word mask.
pub fn render_builtin(req: &RenderRequest, style: &BuiltinStyle) -> Result<RenderResult, RenderError> {
    req.validate()?;
    let start = Instant::now();
    let n = BLOCK_CANVAS as usize;
    let mask = Mask::from_gray(&req.conditions.word_mask);
    let warped = warp_into_quad(&req.conditions.glyph, &req.target_quad)?;

    let mut alpha: Vec<f64> = warped
        .ink
        .pixels()
        .map(|p| (255 - p[0]) as f64 / 255.0)
        .collect();
    if style.feather_px > 0 {
        let soft = box_blur(&alpha, n, style.feather_px as usize);
        for (a, s) in alpha.iter_mut().zip(soft) {
            *a = a.max(0.5 * s);
        }
    }

    let mut sum = 0.0;
    let mut count = 0usize;
    for (x, y) in mask.iter_set() {
        sum += luminance(req.source_block.get_pixel(x, y).0);
        count += 1;
    }
    let bg = if count > 0 {
        sum / count as f64
    } else {
        let all: f64 = req.source_block.pixels().map(|p| luminance(p.0)).sum();
        all / (n * n) as f64
    };
    let color = choose_text_color(bg, style);

    let mut out: RgbImage = req.source_block.clone();
    for (x, y) in mask.iter_set() {
        let a = alpha[y as usize * n + x as usize];
        if a <= 0.0 {
            continue;
        }
        let src = req.source_block.get_pixel(x, y).0;
        let mut px = [0u8; 3];
        for c in 0..3 {
            px[c] = (src[c] as f64 * (1.0 - a) + color[c] as f64 * a).round().clamp(0.0, 255.0) as u8;
        }
        out.put_pixel(x, y, Rgb(px));
    }
    Ok(RenderResult {
        rendered_block: out,
        renderer_tag: RendererTag::BuiltIn,
        latency_ms: start.elapsed().as_millis() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Quad;
    use crate::glyph::{build_condition_set, rasterize_glyph, BitmapFont};

    fn request(block: &RgbImage, text: &str) -> RenderRequest {
        let quad = Quad::from_coords([120., 200., 400., 190., 405., 270., 118., 280.]).unwrap();
        let g = rasterize_glyph(text, &BitmapFont, 48).unwrap();
        let c = build_condition_set(block, &quad, &g, block).unwrap();
        RenderRequest::new(c, block.clone(), quad, "r1", 1000).unwrap()
    }

    #[test]
    fn white_background_gets_dark_ink() {
        let block = RgbImage::from_pixel(512, 512, Rgb([255, 255, 255]));
        assert!(luminance(choose_text_color(255.0, &BuiltinStyle::default())) <= 64.0);
        let out = render_builtin(&request(&block, "Dark"), &BuiltinStyle::default()).unwrap();
        let darkest = out.rendered_block.pixels().map(|p| luminance(p.0)).fold(255.0, f64::min);
        assert!(darkest <= 64.0);
        assert_eq!(out.renderer_tag, RendererTag::BuiltIn);
    }

    #[test]
    fn blank_glyph_leaves_block_unchanged() {
        let block = RgbImage::from_fn(512, 512, |x, y| Rgb([x as u8, y as u8, 77]));
        let out = render_builtin(&request(&block, "  "), &BuiltinStyle::default()).unwrap();
        assert_eq!(out.rendered_block, block);
    }

    #[test]
    fn changes_stay_inside_word_mask() {
        let block = RgbImage::from_fn(512, 512, |x, y| Rgb([(x / 3) as u8, (y / 3) as u8, 30]));
        let req = request(&block, "Inside");
        let out = render_builtin(&req, &BuiltinStyle::default()).unwrap();
        let mut changed = 0;
        for (x, y, p) in out.rendered_block.enumerate_pixels() {
            if p != block.get_pixel(x, y) {
                changed += 1;
                assert_eq!(req.conditions.word_mask.get_pixel(x, y)[0], 255);
            }
        }
        assert!(changed > 100);
    }

    #[test]
    fn palette_rule() {
        let style = BuiltinStyle {
            palette: vec![[200, 30, 30], [20, 20, 120], [250, 250, 0]],
            ..BuiltinStyle::default()
        };
        // background luma 200: red (81) and navy (31) are far enough, red is nearer
        assert_eq!(choose_text_color(200.0, &style), [200, 30, 30]);
        // background luma 60: only yellow (235) qualifies
        assert_eq!(choose_text_color(60.0, &style), [250, 250, 0]);
        // background luma 140: nothing far enough -> black/white rule picks black
        let muted = BuiltinStyle { palette: vec![[140, 140, 140]], ..BuiltinStyle::default() };
        assert_eq!(choose_text_color(140.0, &muted), [0, 0, 0]);
        assert_eq!(choose_text_color(100.0, &BuiltinStyle::default()), [255, 255, 255]);
        assert_eq!(choose_text_color(127.5, &BuiltinStyle::default()), [0, 0, 0]);
    }

    #[test]
    fn transcript_mismatch_rejected() {
        let block = RgbImage::new(512, 512);
        let mut req = request(&block, "abc");
        req.transcript = "abd".into();
        assert!(matches!(render_builtin(&req, &BuiltinStyle::default()), Err(RenderError::InvalidRequest(_))));
    }
}
