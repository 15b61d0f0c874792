use std::collections::{BTreeSet, VecDeque};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::{DepthMap, PlacementError, SegmentationMap};
use crate::geometry::{Mask, Quad};

/// Depth plane `z = a*x + b*y + c` over pixel-center coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Plane {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.a * x + self.b * y + self.c
    }
}

/// A 4-connected single-class region. The mask is stored cropped to the
/// region's bounding box at `origin`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionCandidate {
    pub class_id: u16,
    pub class_name: String,
    pub origin: (u32, u32),
    pub mask: Mask,
    pub area: usize,
    pub image_dims: (u32, u32),
    /// First pixel in raster order.
    pub first_pixel: (u32, u32),
    pub plane: Option<Plane>,
    pub rms_residual: f64,
    /// max - min depth over the region.
    pub depth_range: f64,
}

impl RegionCandidate {
    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.origin.0
            && y >= self.origin.1
            && self.mask.get(x - self.origin.0, y - self.origin.1)
    }

    pub fn full_mask(&self) -> Mask {
        let mut m = Mask::new(self.image_dims.0, self.image_dims.1);
        for (x, y) in self.mask.iter_set() {
            m.set(x + self.origin.0, y + self.origin.1, true);
        }
        m
    }

    pub fn pixels(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.mask
            .iter_set()
            .map(move |(x, y)| (x + self.origin.0, y + self.origin.1))
    }

    /// Removes the quad, grown by `margin` pixels, from the region so later
    /// placements cannot overlap it.
    pub fn exclude_quad(&mut self, quad: &Quad, margin: u32) {
        let (ox, oy) = (self.origin.0 as f64, self.origin.1 as f64);
        let local = quad.map_similarity(|p| crate::geometry::Point::new(p.x - ox, p.y - oy));
        let hit = Mask::from_quad(self.mask.width(), self.mask.height(), &local).dilate(margin);
        for (x, y) in hit.iter_set() {
            if self.mask.get(x, y) {
                self.mask.set(x, y, false);
                self.area -= 1;
            }
        }
    }
}

/// 4-connected components of allowed-class pixels with at least `min_area`
/// pixels, largest first; ties go to the component starting earlier in
/// raster order. Allowed names missing from the class table are logged.
pub fn candidate_regions(
    seg: &SegmentationMap,
    allowed_classes: &BTreeSet<String>,
    min_area: usize,
) -> Vec<RegionCandidate> {
    let table = seg.class_table();
    let missing: Vec<&String> = allowed_classes
        .iter()
        .filter(|name| !table.values().any(|v| v == *name))
        .collect();
    if !allowed_classes.is_empty() && missing.len() == allowed_classes.len() {
        tracing::warn!(?missing, "no allowed class is present in the class table");
    } else if !missing.is_empty() {
        tracing::debug!(?missing, "allowed classes not present in the class table");
    }
    let allowed_ids: BTreeSet<u16> = table
        .iter()
        .filter(|(_, v)| allowed_classes.contains(*v))
        .map(|(k, _)| *k)
        .collect();
    let (w, h) = seg.dims();
    let mut seen = vec![false; w as usize * h as usize];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for y0 in 0..h {
        for x0 in 0..w {
            let i0 = (y0 * w + x0) as usize;
            let id = seg.label(x0, y0);
            if seen[i0] || !allowed_ids.contains(&id) {
                continue;
            }
            seen[i0] = true;
            queue.push_back((x0, y0));
            let mut pixels = Vec::new();
            while let Some((x, y)) = queue.pop_front() {
                pixels.push((x, y));
                let mut visit = |nx: u32, ny: u32| {
                    let ni = (ny * w + nx) as usize;
                    if !seen[ni] && seg.label(nx, ny) == id {
                        seen[ni] = true;
                        queue.push_back((nx, ny));
                    }
                };
                if x > 0 {
                    visit(x - 1, y);
                }
                if x + 1 < w {
                    visit(x + 1, y);
                }
                if y > 0 {
                    visit(x, y - 1);
                }
                if y + 1 < h {
                    visit(x, y + 1);
                }
            }
            if pixels.len() < min_area {
                continue;
            }
            let bx0 = pixels.iter().map(|p| p.0).min().expect("non-empty");
            let by0 = pixels.iter().map(|p| p.1).min().expect("non-empty");
            let bx1 = pixels.iter().map(|p| p.0).max().expect("non-empty");
            let by1 = pixels.iter().map(|p| p.1).max().expect("non-empty");
            let mut mask = Mask::new(bx1 - bx0 + 1, by1 - by0 + 1);
            for &(x, y) in &pixels {
                mask.set(x - bx0, y - by0, true);
            }
            out.push(RegionCandidate {
                class_id: id,
                class_name: table[&id].clone(),
                origin: (bx0, by0),
                mask,
                area: pixels.len(),
                image_dims: (w, h),
                first_pixel: (x0, y0),
                plane: None,
                rms_residual: 0.0,
                depth_range: 0.0,
            });
        }
    }
    out.sort_by(|a, b| {
        b.area
            .cmp(&a.area)
            .then((a.first_pixel.1, a.first_pixel.0).cmp(&(b.first_pixel.1, b.first_pixel.0)))
    });
    out
}

const MAX_FIT_SAMPLES: usize = 10_000;

fn solve_plane(points: &[(f64, f64, f64)]) -> Option<Plane> {
    let n = points.len() as f64;
    if points.len() < 3 {
        return None;
    }
    let (mx, my, mz) = points.iter().fold((0.0, 0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1, a.2 + p.2));
    let (mx, my, mz) = (mx / n, my / n, mz / n);
    let (mut sxx, mut sxy, mut syy, mut sxz, mut syz) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y, z) in points {
        let (dx, dy, dz) = (x - mx, y - my, z - mz);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
        sxz += dx * dz;
        syz += dy * dz;
    }
    let det = sxx * syy - sxy * sxy;
    if !(sxx > 0.0 && syy > 0.0) || det <= 1e-9 * sxx * syy {
        return None;
    }
    // Centered normal equations; the intercept follows from the means.
    let m = Matrix3::new(sxx, sxy, 0.0, sxy, syy, 0.0, 0.0, 0.0, 1.0);
    let sol = m.lu().solve(&Vector3::new(sxz, syz, 0.0))?;
    let (a, b) = (sol[0], sol[1]);
    Some(Plane {
        a,
        b,
        c: mz - a * mx - b * my,
    })
}

/// Least-squares depth plane over the region. At most 10,000 pixels, taken
/// at evenly spaced raster-order positions, enter the fit; the RMS residual
/// and depth range cover every region pixel.
pub fn fit_plane(depth: &DepthMap, region: &RegionCandidate) -> Result<RegionCandidate, PlacementError> {
    if depth.dims() != region.image_dims {
        return Err(PlacementError::DimensionMismatch(format!(
            "depth map is {:?}, region belongs to a {:?} image",
            depth.dims(),
            region.image_dims
        )));
    }
    let all: Vec<(f64, f64, f64)> = region
        .pixels()
        .map(|(x, y)| (x as f64 + 0.5, y as f64 + 0.5, depth.get(x, y)))
        .collect();
    let sample: Vec<(f64, f64, f64)> = if all.len() > MAX_FIT_SAMPLES {
        (0..MAX_FIT_SAMPLES)
            .map(|i| all[i * all.len() / MAX_FIT_SAMPLES])
            .collect()
    } else {
        all.clone()
    };
    let plane = solve_plane(&sample)
        .or_else(|| (sample.len() < all.len()).then(|| solve_plane(&all)).flatten())
        .ok_or_else(|| {
            PlacementError::DegeneratePlane(format!(
                "region of {} pixels at {:?} has collinear support",
                region.area, region.first_pixel
            ))
        })?;
    let sse: f64 = all
        .iter()
        .map(|&(x, y, z)| (z - plane.eval(x, y)).powi(2))
        .sum();
    let (lo, hi) = all
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.2), hi.max(p.2)));
    let mut out = region.clone();
    out.plane = Some(plane);
    out.rms_residual = (sse / all.len() as f64).sqrt();
    out.depth_range = hi - lo;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn table() -> BTreeMap<u16, String> {
        [(0, "sky".to_string()), (1, "wall".to_string()), (2, "sign".to_string())].into()
    }

    fn allowed() -> BTreeSet<String> {
        ["wall".to_string(), "sign".to_string()].into()
    }

    #[test]
    fn uniform_map_is_one_region() {
        let seg = SegmentationMap::from_fn(40, 30, table(), |_, _| 1).unwrap();
        let r = candidate_regions(&seg, &allowed(), 1);
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].area, 1200);
        assert_eq!(r[0].class_name, "wall");
    }

    #[test]
    fn small_patches_filtered() {
        let seg = SegmentationMap::from_fn(40, 40, table(), |x, y| {
            if (x < 10 && y < 10) || (x >= 30 && y >= 30) { 2 } else { 0 }
        })
        .unwrap();
        assert!(candidate_regions(&seg, &allowed(), 150).is_empty());
        assert_eq!(candidate_regions(&seg, &allowed(), 100).len(), 2);
    }

    #[test]
    fn checkerboard_tiles_are_separate() {
        let seg = SegmentationMap::from_fn(64, 64, table(), |x, y| ((x / 8 + y / 8) % 2) as u16).unwrap();
        let r = candidate_regions(&seg, &allowed(), 1);
        assert_eq!(r.len(), 32);
        assert!(r.iter().all(|c| c.area == 64));
        // equal areas -> raster order of first pixels
        assert_eq!(r[0].first_pixel, (8, 0));
        assert_eq!(r[1].first_pixel, (24, 0));
    }

    #[test]
    fn different_classes_do_not_merge() {
        let seg = SegmentationMap::from_fn(20, 10, table(), |x, _| if x < 12 { 1 } else { 2 }).unwrap();
        let r = candidate_regions(&seg, &allowed(), 1);
        assert_eq!(r.len(), 2);
        assert_eq!((r[0].area, r[1].area), (120, 80));
    }

    #[test]
    fn plane_recovery() {
        let seg = SegmentationMap::from_fn(120, 90, table(), |_, _| 1).unwrap();
        let region = &candidate_regions(&seg, &allowed(), 1)[0];
        let depth = DepthMap::from_fn(120, 90, |x, y| {
            0.01 * (x as f64 + 0.5) + 0.02 * (y as f64 + 0.5) + 3.0
        })
        .unwrap();
        let fit = fit_plane(&depth, region).unwrap();
        let p = fit.plane.unwrap();
        assert!((p.a - 0.01).abs() < 1e-6 && (p.b - 0.02).abs() < 1e-6 && (p.c - 3.0).abs() < 1e-6);
        assert!(fit.rms_residual < 1e-9);

        let flat = DepthMap::from_fn(120, 90, |_, _| 4.25).unwrap();
        let fit = fit_plane(&flat, region).unwrap();
        let p = fit.plane.unwrap();
        assert!(p.a.abs() < 1e-12 && p.b.abs() < 1e-12 && (p.c - 4.25).abs() < 1e-12);
        assert_eq!(fit.rms_residual, 0.0);
        assert_eq!(fit.depth_range, 0.0);
    }

    #[test]
    fn collinear_region_is_degenerate() {
        let seg = SegmentationMap::from_fn(50, 5, table(), |_, y| if y == 2 { 1 } else { 0 }).unwrap();
        let region = &candidate_regions(&seg, &allowed(), 1)[0];
        let depth = DepthMap::from_fn(50, 5, |x, _| x as f64).unwrap();
        assert!(matches!(fit_plane(&depth, region), Err(PlacementError::DegeneratePlane(_))));
    }

    #[test]
    fn exclusion_shrinks_region() {
        let seg = SegmentationMap::from_fn(100, 100, table(), |_, _| 1).unwrap();
        let mut r = candidate_regions(&seg, &allowed(), 1).remove(0);
        let q = Quad::from_coords([10., 10., 30., 10., 30., 20., 10., 20.]).unwrap();
        r.exclude_quad(&q, 0);
        assert_eq!(r.area, 10_000 - 200);
        assert!(!r.contains(15, 15) && r.contains(35, 15));
    }
}
