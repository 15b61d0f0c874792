use std::collections::{BTreeMap, BTreeSet};

use image::{Luma, Rgb, RgbImage};

use glyphforge::geometry::{crop_resize, make_block, BlockPolicy, Point, Quad, BLOCK_CANVAS};
use glyphforge::glyph::{build_condition_set, char_class, rasterize_glyph, warp_glyph, BitmapFont, Homography};
use glyphforge::placement::{candidate_regions, fit_plane, DepthMap, SegmentationMap};

#[test]
fn checkerboard_block_upscale_keeps_quadrant_means() {
    let (lo, hi) = (40u8, 200u8);
    let src = RgbImage::from_fn(128, 128, |x, y| {
        let v = if (x < 64) == (y < 64) { lo } else { hi };
        Rgb([v, v, v])
    });
    let quad = Quad::from_coords([32., 32., 96., 32., 96., 96., 32., 96.]).unwrap();
    let block = make_block(&quad, (128, 128), &BlockPolicy::default()).unwrap();
    assert_eq!((block.side_effective, block.crop_origin.x, block.crop_origin.y), (128, 0, 0));
    let up = crop_resize(&src, &block);
    assert_eq!(up.dimensions(), (512, 512));
    for (qx, qy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
        let expected = if qx == qy { lo } else { hi } as f64;
        let mut sum = 0.0;
        for y in qy * 256..(qy + 1) * 256 {
            for x in qx * 256..(qx + 1) * 256 {
                sum += up.get_pixel(x, y)[0] as f64;
            }
        }
        let mean = sum / (256.0 * 256.0);
        assert!((mean - expected).abs() <= 1.0, "quadrant ({qx},{qy}) mean {mean} vs {expected}");
    }
}

#[test]
fn rotated_glyph_keeps_ink_area() {
    let glyph = rasterize_glyph("I", &BitmapFont, 64).unwrap();
    let count = |it: &mut dyn Iterator<Item = u8>| it.filter(|&v| v < 128).count() as f64;
    let src_ink = count(&mut glyph.canvas.pixels().map(|p| p[0]));
    assert!(src_ink > 100.0);

    let (gw, gh) = (glyph.canvas.width() as f64, glyph.canvas.height() as f64);
    let (s, c) = 30f64.to_radians().sin_cos();
    let (cx, cy) = (gw / 2.0, gh / 2.0);
    let (tx, ty) = (100.0, 100.0);
    let h = Homography::new([
        [c, -s, tx - c * cx + s * cy],
        [s, c, ty - s * cx - c * cy],
        [0.0, 0.0, 1.0],
    ])
    .unwrap();
    let warped = warp_glyph(&glyph, &h, (200, 200));
    let out_ink = count(&mut warped.ink.pixels().map(|p| p[0]));
    assert!((out_ink / src_ink - 1.0).abs() <= 0.10, "ink {out_ink} vs {src_ink}");
}

#[test]
fn hemisphere_bump_is_not_planar() {
    let (w, h, r) = (100u32, 100u32, 10.0f64);
    let bump = |x: u32, y: u32| {
        let (dx, dy) = (x as f64 + 0.5 - 50.0, y as f64 + 0.5 - 50.0);
        5.0 + (r * r - dx * dx - dy * dy).max(0.0).sqrt()
    };
    let table: BTreeMap<u16, String> = [(1, "wall".to_string())].into();
    let seg = SegmentationMap::from_fn(w, h, table, |_, _| 1).unwrap();
    let allowed: BTreeSet<String> = ["wall".to_string()].into();
    let region = &candidate_regions(&seg, &allowed, 1)[0];
    let fit = fit_plane(&DepthMap::from_fn(w, h, bump).unwrap(), region).unwrap();

    // The bump is symmetric about the grid center, so the best plane is flat
    // at the mean and the residual is the standard deviation.
    let vals: Vec<f64> = (0..h).flat_map(|y| (0..w).map(move |x| bump(x, y))).collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let std = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64).sqrt();

    assert!(fit.rms_residual > 1.0);
    assert!((fit.rms_residual - std).abs() < 1e-9, "{} vs {std}", fit.rms_residual);
    let p = fit.plane.unwrap();
    assert!(p.a.abs() < 1e-9 && p.b.abs() < 1e-9 && (p.c - mean).abs() < 1e-9);
}

#[test]
fn char_labels_cover_each_character_inside_word_mask() {
    let n = BLOCK_CANVAS;
    let block = RgbImage::from_pixel(n, n, Rgb([200, 210, 220]));
    let bg = RgbImage::from_pixel(64, 64, Rgb([1, 2, 3]));
    for (word, angle) in [("hello", 0.0), ("Road 66", 0.3), ("A-Z", -0.5)] {
        let glyph = rasterize_glyph(word, &BitmapFont, 40).unwrap();
        let quad = Quad::rotated_rect(Point::new(256.0, 256.0), 360.0, 90.0, angle).unwrap();
        let cond = build_condition_set(&block, &quad, &glyph, &bg).unwrap();
        let mask_area = cond.word_mask.pixels().filter(|p| p[0] == 255).count();
        let labelled = cond.char_seg_mask.pixels().filter(|p| p[0] != 0).count();
        assert!(labelled <= mask_area);
        let used: BTreeSet<u8> = cond.char_seg_mask.pixels().map(|p| p[0]).filter(|&l| l != 0).collect();
        let expected: BTreeSet<u8> = word.chars().map(|c| char_class(c).unwrap()).collect();
        assert_eq!(used, expected, "{word}");
        assert!(cond.char_seg_mask.pixels().all(|&Luma([l])| l == 0 || expected.contains(&l)));
    }
}
