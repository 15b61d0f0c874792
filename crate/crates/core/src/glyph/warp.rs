use image::{GrayImage, Luma};

use super::{char_class, GlyphImage, Homography};
use crate::geometry::{sample_bilinear, Point};

/// Glyph ink and character labels resampled onto a target canvas.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedGlyph {
    /// Dark-on-light ink; 255 wherever the glyph canvas does not reach.
    pub ink: GrayImage,
    /// Character class label per pixel, 0 outside every character box.
    pub labels: GrayImage,
}

/// Warps `glyph` through `h` (glyph canvas -> target canvas) by inverse
/// mapping each target pixel center. Ink is bilinear; labels come from the
/// character box containing the nearest source pixel.
pub fn warp_glyph(glyph: &GlyphImage, h: &Homography, canvas_dims: (u32, u32)) -> WarpedGlyph {
    let (cw, ch) = canvas_dims;
    let mut ink = GrayImage::from_pixel(cw, ch, Luma([255]));
    let mut labels = GrayImage::new(cw, ch);
    let Ok(inv) = h.inverse() else {
        return WarpedGlyph { ink, labels };
    };
    let (gw, gh) = (glyph.canvas.width() as f64, glyph.canvas.height() as f64);
    let classes: Vec<u8> = glyph
        .transcript
        .chars()
        .map(|c| char_class(c).unwrap_or(0))
        .collect();

    // Restrict the scan to the image of the glyph canvas when it is bounded.
    let corners = [
        Point::new(0.0, 0.0),
        Point::new(gw, 0.0),
        Point::new(gw, gh),
        Point::new(0.0, gh),
    ];
    let bounded = corners.iter().all(|p| {
        let m = &h.m;
        m[2][0] * p.x + m[2][1] * p.y + m[2][2] > 0.0
    });
    let (x0, y0, x1, y1) = if bounded {
        let mapped: Vec<Point> = corners.iter().map(|&p| h.apply(p)).collect();
        let lo_x = mapped.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
        let lo_y = mapped.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
        let hi_x = mapped.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
        let hi_y = mapped.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
        (
            (lo_x.floor() - 1.0).max(0.0) as u32,
            (lo_y.floor() - 1.0).max(0.0) as u32,
            (hi_x.ceil() + 1.0).clamp(0.0, cw as f64) as u32,
            (hi_y.ceil() + 1.0).clamp(0.0, ch as f64) as u32,
        )
    } else {
        (0, 0, cw, ch)
    };

    let m = &inv.m;
    for y in y0..y1 {
        for x in x0..x1 {
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            let w = m[2][0] * px + m[2][1] * py + m[2][2];
            if w <= 0.0 {
                continue;
            }
            let u = (m[0][0] * px + m[0][1] * py + m[0][2]) / w;
            let v = (m[1][0] * px + m[1][1] * py + m[1][2]) / w;
            if !(u >= 0.0 && v >= 0.0 && u < gw && v < gh) {
                continue;
            }
            let val = sample_bilinear(&glyph.canvas, u - 0.5, v - 0.5)[0];
            ink.put_pixel(x, y, Luma([crate::geometry::resample_to_u8(val)]));
            let (sx, sy) = (u.floor() as u32, v.floor() as u32);
            if let Some(i) = glyph.char_boxes.iter().position(|b| b.contains(sx, sy)) {
                labels.put_pixel(x, y, Luma([classes[i]]));
            }
        }
    }
    WarpedGlyph { ink, labels }
}
