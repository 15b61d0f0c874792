use image::{Rgb, RgbImage};
use proptest::prelude::*;

use glyphforge::config::PipelineConfig;
use glyphforge::dataset::{icdar_line, parse_icdar_line};
use glyphforge::geometry::{
    block_side, crop_resize, make_block, paste_back, remap_quad, BlockPolicy, Direction, Mask, Point, Quad, RectWH,
};
use glyphforge::glyph::quad_homography;
use glyphforge::metrics::{detection_prf, levenshtein, one_minus_ned, polygon_iou};

/// Convex quad with vertices on an ellipse at well-separated angles.
fn convex_quad(max: f64) -> impl Strategy<Value = Quad> {
    (
        10.0..max - 10.0,
        10.0..max - 10.0,
        3.0..max / 4.0,
        3.0..max / 4.0,
        0.0..std::f64::consts::TAU,
        prop::array::uniform4(0.3..1.2f64),
    )
        .prop_filter_map("degenerate", move |(cx, cy, rx, ry, phase, gaps)| {
            let total: f64 = gaps.iter().sum();
            let mut a = phase;
            let mut pts = [Point::default(); 4];
            for (i, g) in gaps.iter().enumerate() {
                pts[i] = Point::new(
                    (cx + rx * a.cos()).clamp(0.0, max),
                    (cy + ry * a.sin()).clamp(0.0, max),
                );
                a += g / total * std::f64::consts::TAU;
            }
            Quad::new(pts).ok().filter(|q| q.area() > 1.0)
        })
}

fn text_image(w: u32, h: u32, seed: u32) -> RgbImage {
    RgbImage::from_fn(w, h, |x, y| {
        let v = x.wrapping_mul(2654435761).wrapping_add(y.wrapping_mul(40503)).wrapping_add(seed);
        Rgb([(v >> 3) as u8, (v >> 11) as u8, (v >> 19) as u8])
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn block_side_is_symmetric_and_bounded(w in 1u32..10_000, h in 1u32..10_000) {
        let s = block_side(w, h).unwrap();
        prop_assert_eq!(s, block_side(h, w).unwrap());
        prop_assert!(s.is_power_of_two());
        prop_assert!(s > w.max(h) as u64);
    }

    #[test]
    fn block_window_stays_in_image(q in convex_quad(900.0), iw in 900u32..1400, ih in 900u32..1400, min_side in 16u32..128) {
        let b = make_block(&q, (iw, ih), &BlockPolicy { min_side }).unwrap();
        prop_assert!(b.side_effective <= iw.min(ih));
        prop_assert!(b.side_effective as u64 >= (min_side as u64).min(iw.min(ih) as u64));
        prop_assert!(b.crop_origin.x + b.side_effective <= iw);
        prop_assert!(b.crop_origin.y + b.side_effective <= ih);
        if b.side_raw <= iw.min(ih) as u64 {
            prop_assert!(b.contains_quad(&q));
        }
    }

    #[test]
    fn remap_round_trip(q in convex_quad(600.0)) {
        let b = make_block(&q, (600, 600), &BlockPolicy::default()).unwrap();
        let back = remap_quad(&b, &remap_quad(&b, &q, Direction::ImageToBlock), Direction::BlockToImage);
        for (p, r) in q.points().iter().zip(back.points()) {
            prop_assert!(p.dist(*r) < 1e-6);
        }
    }

    #[test]
    fn paste_back_of_untouched_crop_is_identity(q in convex_quad(300.0), seed in 0u32..1000) {
        let img = text_image(300, 260, seed);
        if let Ok(b) = make_block(&q, (300, 260), &BlockPolicy::default()) {
            let out = paste_back(&img, &b, &crop_resize(&img, &b)).unwrap();
            prop_assert!(out == img);
        }
    }

    #[test]
    fn homography_hits_quad_corners(q in convex_quad(512.0), w in 5.0..400.0f64, h in 5.0..100.0f64) {
        let r = RectWH::new(0.0, 0.0, w, h).unwrap();
        let hm = quad_homography(&r, &q).unwrap();
        for (c, t) in r.corners().iter().zip(q.reading_order()) {
            prop_assert!(hm.apply(*c).dist(t) < 1e-9);
        }
        let inv = hm.inverse().unwrap();
        for t in q.points() {
            prop_assert!(hm.apply(inv.apply(*t)).dist(*t) < 1e-9);
        }
    }

    #[test]
    fn quad_canonical_form_ignores_vertex_order(q in convex_quad(400.0), rot in 0usize..4, rev in any::<bool>()) {
        let mut pts = *q.points();
        pts.rotate_left(rot);
        if rev { pts.reverse(); }
        prop_assert_eq!(Quad::new(pts).unwrap(), q);
    }

    #[test]
    fn ned_symmetry_and_range(a in "[a-cA-C]{0,12}", b in "[a-cA-C]{0,12}") {
        let s = one_minus_ned(&a, &b);
        prop_assert_eq!(s, one_minus_ned(&b, &a));
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert_eq!(s == 1.0, a == b);
    }

    #[test]
    fn edit_distance_triangle(a in "[ab]{0,10}", b in "[ab]{0,10}", c in "[ab]{0,10}") {
        prop_assert!(levenshtein(&a, &c) <= levenshtein(&a, &b) + levenshtein(&b, &c));
    }

    #[test]
    fn iou_symmetry_and_rigid_invariance(a in convex_quad(200.0), b in convex_quad(200.0), th in 0.0..6.28f64, dx in -50.0..50.0f64, dy in -50.0..50.0f64) {
        let i = polygon_iou(&a, &b);
        prop_assert!((0.0..=1.0).contains(&i));
        prop_assert!((i - polygon_iou(&b, &a)).abs() < 1e-9);
        prop_assert!((polygon_iou(&a, &a) - 1.0).abs() < 1e-9);
        let (s, c) = th.sin_cos();
        let f = |p: Point| Point::new(c * p.x - s * p.y + dx, s * p.x + c * p.y + dy);
        let (ra, rb) = (a.map(f).unwrap(), b.map(f).unwrap());
        prop_assert!((polygon_iou(&ra, &rb) - i).abs() < 1e-9);
    }

    #[test]
    fn detection_counts_are_consistent(p in prop::collection::vec(convex_quad(100.0), 0..6), g in prop::collection::vec(convex_quad(100.0), 0..6)) {
        let r = detection_prf(&p, &g, 0.5);
        prop_assert_eq!(r.tp + r.fp, p.len());
        prop_assert_eq!(r.tp + r.fn_, g.len());
        prop_assert!((0.0..=1.0).contains(&r.hmean));
    }

    #[test]
    fn erode_within_mask_within_dilate(bits in prop::collection::vec(any::<bool>(), 24 * 18), r in 0u32..4) {
        let mut m = Mask::new(24, 18);
        for (i, b) in bits.iter().enumerate() {
            m.set(i as u32 % 24, i as u32 / 24, *b);
        }
        prop_assert!(m.erode(r).is_subset_of(&m));
        prop_assert!(m.is_subset_of(&m.dilate(r)));
    }

    #[test]
    fn icdar_integer_quads_round_trip(q in convex_quad(500.0), word in "[ -~]{0,12}") {
        let r = Quad::new(q.points().map(|p| Point::new(p.x.round(), p.y.round())));
        if let Ok(r) = r {
            let (back, t) = parse_icdar_line(&icdar_line(&r, &word)).unwrap();
            prop_assert_eq!(back, r);
            prop_assert_eq!(t, word);
        }
    }

    #[test]
    fn config_canonical_round_trip(k in 1u32..20, lo in 1.0..30.0f64, span in 0.0..100.0f64, margin in 0u32..10, tol in 0.0..1.0f64, endpoint in proptest::option::of("http://[a-z]{1,8}:[0-9]{2,4}")) {
        let mut cfg = PipelineConfig::default();
        cfg.dataset.k_max = k;
        cfg.dataset.min_text_height = lo;
        cfg.dataset.max_text_height = lo + span;
        cfg.placement.margin = margin;
        cfg.placement.plane_tolerance = tol;
        cfg.render.endpoint = endpoint;
        let text = cfg.canonical();
        let back = PipelineConfig::from_toml(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.canonical(), text);
    }
}
