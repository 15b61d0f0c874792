//! Deterministic synthetic backgrounds with matching segmentation and
//! depth maps, for tests and demos.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use image::{Rgb, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::placement::{DepthMap, PlacementError, SegmentationMap};

pub const FIXTURE_CLASSES: [(u16, &str); 4] = [(0, "sky"), (1, "wall"), (2, "sign"), (3, "tree")];

pub struct FixtureScene {
    pub image: RgbImage,
    pub seg: SegmentationMap,
    pub depth: DepthMap,
}

/// A street-like scene: sky band, textured wall plane, a sign panel and a
/// bumpy tree blob. Layout and colors vary with `seed`.
pub fn fixture_scene(width: u32, height: u32, seed: u64) -> FixtureScene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (width as f64, height as f64);
    let horizon = (h * rng.random_range(0.15..0.3)) as u32;
    let sw = (w * rng.random_range(0.3..0.5)) as u32;
    let sh = (h * rng.random_range(0.2..0.35)) as u32;
    let sx = rng.random_range(0..(width - sw).max(1));
    let sy = rng.random_range(horizon..(height - sh).max(horizon + 1));
    let (tx, ty, tr) = (rng.random_range(0.0..w), rng.random_range(h * 0.5..h), h * 0.18);
    let wall: [f64; 3] = [rng.random_range(90.0..200.0), rng.random_range(70.0..180.0), rng.random_range(60.0..160.0)];
    let sign: [f64; 3] = [rng.random_range(20.0..240.0), rng.random_range(20.0..240.0), rng.random_range(20.0..240.0)];
    let (ga, gb) = (rng.random_range(-0.01..0.01), rng.random_range(0.0..0.01));

    let class_at = |x: u32, y: u32| -> u16 {
        let (fx, fy) = (x as f64 + 0.5, y as f64 + 0.5);
        if (fx - tx).hypot(fy - ty) < tr {
            3
        } else if x >= sx && x < sx + sw && y >= sy && y < sy + sh {
            2
        } else if y < horizon {
            0
        } else {
            1
        }
    };
    let table: BTreeMap<u16, String> = FIXTURE_CLASSES.iter().map(|&(k, v)| (k, v.to_string())).collect();
    let seg = SegmentationMap::from_fn(width, height, table, class_at).expect("fixture ids are in the table");
    let depth = DepthMap::from_fn(width, height, |x, y| {
        let (fx, fy) = (x as f64 + 0.5, y as f64 + 0.5);
        match class_at(x, y) {
            0 => 100.0,
            1 => 8.0 + ga * fx + gb * fy,
            2 => 6.0 + 0.5 * ga * fx,
            _ => 5.0 + (fx * 0.3).sin() * (fy * 0.3).cos(),
        }
    })
    .expect("fixture depth is finite and positive");
    let image = RgbImage::from_fn(width, height, |x, y| {
        let (fx, fy) = (x as f64, y as f64);
        let tex = ((fx * 0.7).sin() * (fy * 0.5).cos() * 12.0) + (((x * 7 + y * 13) % 17) as f64 - 8.0);
        let px = |c: [f64; 3], t: f64| Rgb(c.map(|v| (v + t).clamp(0.0, 255.0) as u8));
        match class_at(x, y) {
            0 => px([120.0 + fy * 0.3, 170.0 + fy * 0.2, 230.0], 0.0),
            1 => px(wall, tex + if y % 16 == 0 || (x + 16 * (y / 16 % 2)) % 32 == 0 { -40.0 } else { 0.0 }),
            2 => px(sign, 0.3 * tex),
            _ => px([40.0, 110.0 + tex * 2.0, 40.0], tex),
        }
    });
    FixtureScene { image, seg, depth }
}

/// Writes `count` scenes as `scene_NNN.png` into `<dir>/backgrounds` with
/// `.seg.png`, `.seg.json` and `.depth.bin` into `<dir>/aux`.
pub fn write_fixture_set(dir: &Path, count: usize, width: u32, height: u32, seed: u64) -> Result<(PathBuf, PathBuf), PlacementError> {
    let bg = dir.join("backgrounds");
    let aux = dir.join("aux");
    for d in [&bg, &aux] {
        std::fs::create_dir_all(d).map_err(|e| PlacementError::Io {
            path: d.display().to_string(),
            message: e.to_string(),
        })?;
    }
    for i in 0..count {
        let s = fixture_scene(width, height, seed.wrapping_add(i as u64));
        let stem = format!("scene_{i:03}");
        let p = bg.join(format!("{stem}.png"));
        s.image.save(&p).map_err(|e| PlacementError::Io {
            path: p.display().to_string(),
            message: e.to_string(),
        })?;
        s.seg.save(&aux.join(format!("{stem}.seg.png")), &aux.join(format!("{stem}.seg.json")))?;
        s.depth.save_grid(&aux.join(format!("{stem}.depth.bin")))?;
    }
    Ok((bg, aux))
}
