use image::RgbImage;

use crate::render::luminance;

const SHARPNESS_KNEE: f64 = 100.0;
const FULL_RANGE: f64 = 64.0;

/// No-reference quality in [0, 1]: Laplacian-variance sharpness mapped
/// through `v / (v + 100)`, scaled by how much of a 64-level luma spread
/// the 1st..99th percentile covers.
pub fn quality_proxy(img: &RgbImage) -> f64 {
    let (w, h) = img.dimensions();
    if w < 3 || h < 3 {
        return 0.0;
    }
    let luma: Vec<f64> = img.pixels().map(|p| luminance(p.0)).collect();
    let at = |x: u32, y: u32| luma[(y * w + x) as usize];
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut n = 0.0;
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let l = at(x - 1, y) + at(x + 1, y) + at(x, y - 1) + at(x, y + 1) - 4.0 * at(x, y);
            sum += l;
            sum_sq += l * l;
            n += 1.0;
        }
    }
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    let sharp = var / (var + SHARPNESS_KNEE);

    let mut sorted = luma;
    sorted.sort_by(|a, b| a.total_cmp(b));
    let pct = |q: f64| sorted[((sorted.len() - 1) as f64 * q).round() as usize];
    let exposure = ((pct(0.99) - pct(0.01)) / FULL_RANGE).clamp(0.0, 1.0);
    (sharp * exposure).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Rgb;

    #[test]
    fn flat_gray_scores_zero() {
        assert_eq!(quality_proxy(&RgbImage::from_pixel(64, 64, Rgb([128, 128, 128]))), 0.0);
    }

    #[test]
    fn checker_scores_high() {
        let img = RgbImage::from_fn(64, 64, |x, y| if (x / 2 + y / 2) % 2 == 0 { Rgb([20; 3]) } else { Rgb([230; 3]) });
        assert!(quality_proxy(&img) > 0.9);
    }
}
