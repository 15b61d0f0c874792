use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Plane, RegionCandidate};
use crate::geometry::{Mask, Point, Quad};

pub const DEFAULT_ALLOWED_CLASSES: [&str; 8] = [
    "wall", "sign", "billboard", "signboard", "building", "board", "door", "poster",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlacementConfig {
    pub allowed_classes: Vec<String>,
    pub min_area: usize,
    /// Planarity threshold as a fraction of the region's depth range.
    pub plane_tolerance: f64,
    /// Erosion radius in pixels applied before sampling.
    pub margin: u32,
    pub max_tries: u32,
    pub max_tilt_deg: f64,
    /// Depth units per pixel when measuring surface slope.
    pub depth_scale: f64,
}

impl Default for PlacementConfig {
    fn default() -> Self {
        Self {
            allowed_classes: DEFAULT_ALLOWED_CLASSES.iter().map(|s| s.to_string()).collect(),
            min_area: 400,
            plane_tolerance: 0.05,
            margin: 2,
            max_tries: 50,
            max_tilt_deg: 30.0,
            depth_scale: 1.0,
        }
    }
}

pub fn is_planar(region: &RegionCandidate, cfg: &PlacementConfig) -> bool {
    region.plane.is_some() && region.rms_residual <= cfg.plane_tolerance * region.depth_range + 1e-9
}

/// On-screen angle (radians, clockwise positive) of the image x-axis
/// projected onto the plane, clamped to the configured tilt.
pub fn plane_text_angle(plane: &Plane, cfg: &PlacementConfig) -> f64 {
    let (a, b) = (plane.a / cfg.depth_scale, plane.b / cfg.depth_scale);
    let angle = (-a * b).atan2(1.0 + b * b);
    let lim = cfg.max_tilt_deg.to_radians();
    angle.clamp(-lim, lim)
}

fn corner_inside(mask: &Mask, p: Point, c: Point) -> bool {
    // nudge toward the center so a corner on a pixel edge tests the pixel it bounds
    let x = p.x + (c.x - p.x).signum() * 1e-6;
    let y = p.y + (c.y - p.y).signum() * 1e-6;
    x >= 0.0 && y >= 0.0 && mask.get_i(x.floor() as i64, y.floor() as i64)
}

/// Samples a rotated rectangle of aspect `text_aspect` (width / height)
/// with height drawn log-uniformly from `height_range`, lying inside the
/// region. Returns `None` for non-planar regions or when no fit is found
/// within `max_tries`.
pub fn sample_placement<R: Rng + ?Sized>(
    region: &RegionCandidate,
    text_aspect: f64,
    rng: &mut R,
    cfg: &PlacementConfig,
    height_range: (f64, f64),
) -> Option<Quad> {
    let (hmin, hmax) = height_range;
    if !is_planar(region, cfg) || !(text_aspect > 0.0) || !(hmin > 0.0) || hmax < hmin {
        return None;
    }
    let eroded = region.mask.erode(cfg.margin);
    let centers: Vec<(u32, u32)> = eroded.iter_set().collect();
    if centers.is_empty() {
        return None;
    }
    let (ex0, ey0, ex1, ey1) = centers.iter().fold(
        (u32::MAX, u32::MAX, 0, 0),
        |(a, b, c, d), &(x, y)| (a.min(x), b.min(y), c.max(x + 1), d.max(y + 1)),
    );
    let (bw, bh) = ((ex1 - ex0) as f64, (ey1 - ey0) as f64);
    let angle = plane_text_angle(region.plane.as_ref()?, cfg);
    let (s, c) = (angle.sin().abs(), angle.cos().abs());
    let h_fit = (bw / (text_aspect * c + s)).min(bh / (text_aspect * s + c));
    let hcap = hmax.min(h_fit);
    if hcap < hmin {
        return None;
    }
    let (ox, oy) = (region.origin.0 as f64, region.origin.1 as f64);
    for _ in 0..cfg.max_tries {
        let h = if hcap > hmin {
            rng.random_range(hmin.ln()..=hcap.ln()).exp()
        } else {
            hmin
        };
        let w = h * text_aspect;
        let (cx, cy) = centers[rng.random_range(0..centers.len())];
        let center = Point::new(cx as f64 + 0.5, cy as f64 + 0.5);
        let Ok(local) = Quad::rotated_rect(center, w, h, angle) else {
            continue;
        };
        if !local.points().iter().all(|&p| corner_inside(&region.mask, p, center)) {
            continue;
        }
        let cover = Mask::from_quad(region.mask.width(), region.mask.height(), &local);
        if cover.is_empty() || !cover.is_subset_of(&region.mask) {
            continue;
        }
        return Some(local.map_similarity(|p| Point::new(p.x + ox, p.y + oy)));
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::placement::{candidate_regions, fit_plane, DepthMap, SegmentationMap};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::{BTreeMap, BTreeSet};

    fn region(w: u32, h: u32, seg_fn: impl Fn(u32, u32) -> u16, depth_fn: impl Fn(u32, u32) -> f64) -> RegionCandidate {
        let table: BTreeMap<u16, String> = [(0, "sky".into()), (1, "wall".into())].into();
        let seg = SegmentationMap::from_fn(w, h, table, seg_fn).unwrap();
        let allowed: BTreeSet<String> = ["wall".to_string()].into();
        let r = candidate_regions(&seg, &allowed, 1).remove(0);
        fit_plane(&DepthMap::from_fn(w, h, depth_fn).unwrap(), &r).unwrap()
    }

    #[test]
    fn flat_full_image_aspect() {
        let r = region(400, 300, |_, _| 1, |_, _| 2.0);
        let cfg = PlacementConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let q = sample_placement(&r, 5.0, &mut rng, &cfg, (12.0, 96.0)).unwrap();
            assert!(q.within(400.0, 300.0));
            let b = q.bounding_rect();
            assert!((b.w / b.h / 5.0 - 1.0).abs() < 0.1);
        }
    }

    #[test]
    fn too_small_region_yields_none() {
        let r = region(40, 40, |x, y| (x >= 10 && x < 20 && y >= 10 && y < 20) as u16, |_, _| 1.0);
        let cfg = PlacementConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_placement(&r, 3.0, &mut rng, &cfg, (12.0, 96.0)).is_none());
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let r = region(200, 120, |_, _| 1, |x, _| 1.0 + 0.002 * x as f64);
        let cfg = PlacementConfig::default();
        let a = sample_placement(&r, 4.0, &mut ChaCha8Rng::seed_from_u64(9), &cfg, (12.0, 40.0));
        let b = sample_placement(&r, 4.0, &mut ChaCha8Rng::seed_from_u64(9), &cfg, (12.0, 40.0));
        assert!(a.is_some());
        assert_eq!(a, b);
    }

    #[test]
    fn non_planar_region_never_places() {
        let r = region(100, 100, |_, _| 1, |x, y| {
            let d = ((x as f64 - 50.0).powi(2) + (y as f64 - 50.0).powi(2)).sqrt();
            if d < 30.0 { 5.0 + 10.0 * (1.0 - (d / 30.0).powi(2)).sqrt() } else { 5.0 }
        });
        assert!(!is_planar(&r, &PlacementConfig::default()));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(sample_placement(&r, 2.0, &mut rng, &PlacementConfig::default(), (12.0, 40.0)).is_none());
    }

    #[test]
    fn tilt_follows_plane() {
        let cfg = PlacementConfig::default();
        assert_eq!(plane_text_angle(&Plane { a: 0.3, b: 0.0, c: 1.0 }, &cfg), 0.0);
        let t = plane_text_angle(&Plane { a: 0.5, b: 0.5, c: 1.0 }, &cfg);
        assert!((t - (-0.25f64).atan2(1.25)).abs() < 1e-12);
        let steep = plane_text_angle(&Plane { a: 5.0, b: 5.0, c: 1.0 }, &cfg);
        assert!((steep + 30f64.to_radians()).abs() < 1e-12);
    }

    #[test]
    fn sampled_quads_stay_in_irregular_region() {
        let r = region(160, 160, |x, y| {
            let (dx, dy) = (x as f64 - 80.0, y as f64 - 80.0);
            (dx * dx + dy * dy < 70.0 * 70.0) as u16
        }, |x, y| 2.0 + 0.004 * x as f64 + 0.003 * y as f64);
        let cfg = PlacementConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let full = r.full_mask();
        for _ in 0..30 {
            if let Some(q) = sample_placement(&r, 3.0, &mut rng, &cfg, (12.0, 60.0)) {
                assert!(Mask::from_quad(160, 160, &q).is_subset_of(&full));
            }
        }
    }
}
