//! Bilinear resampling. Pixel `i` covers `[i, i+1)` and has its center at
//! `i + 0.5`; lookups outside the image clamp to the nearest edge pixel.

use image::{ImageBuffer, Pixel};

type Img<P> = ImageBuffer<P, Vec<u8>>;

/// Bilinear lookup at index-space coordinates (pixel `i` centered at `i`).
/// Returns one value per channel, unrounded.
pub fn sample_bilinear<P: Pixel<Subpixel = u8>>(img: &Img<P>, x: f64, y: f64) -> [f64; 4] {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let x = x.clamp(0.0, (w - 1) as f64);
    let y = y.clamp(0.0, (h - 1) as f64);
    let (x0, y0) = (x.floor() as i64, y.floor() as i64);
    let (fx, fy) = (x - x0 as f64, y - y0 as f64);
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let n = P::CHANNEL_COUNT as usize;
    let mut out = [0.0; 4];
    let taps = [
        (x0, y0, (1.0 - fx) * (1.0 - fy)),
        (x1, y0, fx * (1.0 - fy)),
        (x0, y1, (1.0 - fx) * fy),
        (x1, y1, fx * fy),
    ];
    for (tx, ty, wgt) in taps {
        if wgt == 0.0 {
            continue;
        }
        let px = img.get_pixel(tx as u32, ty as u32).channels();
        for c in 0..n {
            out[c] += wgt * px[c] as f64;
        }
    }
    out
}

#[inline]
pub(crate) fn to_u8(v: f64) -> u8 {
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

pub(crate) fn pixel_from<P: Pixel<Subpixel = u8>>(vals: [f64; 4]) -> P {
    let mut p = P::from_slice(&[0u8; 4][..P::CHANNEL_COUNT as usize]).to_owned();
    for (c, v) in p.channels_mut().iter_mut().zip(vals) {
        *c = to_u8(v);
    }
    p
}

/// Resamples the window `[x0, x0+w) x [y0, y0+h)` of `img` to `out_w` x `out_h`.
pub fn resample_window<P: Pixel<Subpixel = u8>>(
    img: &Img<P>,
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    out_w: u32,
    out_h: u32,
) -> Img<P> {
    let sx = w / out_w as f64;
    let sy = h / out_h as f64;
    ImageBuffer::from_fn(out_w, out_h, |i, j| {
        let x = x0 + (i as f64 + 0.5) * sx - 0.5;
        let y = y0 + (j as f64 + 0.5) * sy - 0.5;
        pixel_from(sample_bilinear(img, x, y))
    })
}

pub fn resize_bilinear<P: Pixel<Subpixel = u8>>(img: &Img<P>, out_w: u32, out_h: u32) -> Img<P> {
    resample_window(
        img,
        0.0,
        0.0,
        img.width() as f64,
        img.height() as f64,
        out_w,
        out_h,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::{GrayImage, Luma};

    #[test]
    fn same_size_resize_is_identity() {
        let img = GrayImage::from_fn(17, 9, |x, y| Luma([(x * 13 + y * 7) as u8]));
        assert_eq!(resize_bilinear(&img, 17, 9), img);
    }

    #[test]
    fn midpoint_interpolates() {
        let img = GrayImage::from_fn(2, 1, |x, _| Luma([if x == 0 { 0 } else { 200 }]));
        assert_eq!(sample_bilinear(&img, 0.5, 0.0)[0], 100.0);
        assert_eq!(sample_bilinear(&img, -3.0, 0.0)[0], 0.0);
        assert_eq!(sample_bilinear(&img, 9.0, 0.0)[0], 200.0);
    }
}
