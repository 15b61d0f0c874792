use std::collections::BTreeMap;
use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma};

use super::PlacementError;

/// Magic prefix of the raw float32 depth grid format.
pub const DEPTH_MAGIC: &[u8; 4] = b"DPTH";

fn io_err(path: &Path, e: impl std::fmt::Display) -> PlacementError {
    PlacementError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Per-pixel class ids plus the id -> name table.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationMap {
    width: u32,
    height: u32,
    labels: Vec<u16>,
    class_table: BTreeMap<u16, String>,
}

impl SegmentationMap {
    pub fn new(
        width: u32,
        height: u32,
        labels: Vec<u16>,
        class_table: BTreeMap<u16, String>,
    ) -> Result<Self, PlacementError> {
        if labels.len() != width as usize * height as usize {
            return Err(PlacementError::DimensionMismatch(format!(
                "{} labels for a {width}x{height} map",
                labels.len()
            )));
        }
        if let Some(id) = labels.iter().find(|id| !class_table.contains_key(id)) {
            return Err(PlacementError::Format(format!(
                "class id {id} missing from class table"
            )));
        }
        Ok(Self {
            width,
            height,
            labels,
            class_table,
        })
    }

    pub fn from_fn(
        width: u32,
        height: u32,
        class_table: BTreeMap<u16, String>,
        f: impl Fn(u32, u32) -> u16,
    ) -> Result<Self, PlacementError> {
        let labels = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::new(width, height, labels, class_table)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    #[inline]
    pub fn label(&self, x: u32, y: u32) -> u16 {
        self.labels[y as usize * self.width as usize + x as usize]
    }

    pub fn class_table(&self) -> &BTreeMap<u16, String> {
        &self.class_table
    }

    /// Reads a 16-bit (or 8-bit) single-channel PNG of class ids and its
    /// JSON class table (`{"<id>": "<name>", ...}`).
    pub fn load(png: &Path, table: &Path) -> Result<Self, PlacementError> {
        let text = std::fs::read_to_string(table).map_err(|e| io_err(table, e))?;
        let raw: BTreeMap<String, String> =
            serde_json::from_str(&text).map_err(|e| PlacementError::Format(format!("{}: {e}", table.display())))?;
        let mut class_table = BTreeMap::new();
        for (k, v) in raw {
            let id: u16 = k
                .trim()
                .parse()
                .map_err(|_| PlacementError::Format(format!("class id {k:?} is not an integer")))?;
            class_table.insert(id, v);
        }
        let img = image::open(png).map_err(|e| io_err(png, e))?;
        let (w, h) = (img.width(), img.height());
        let labels = match img {
            DynamicImage::ImageLuma16(b) => b.into_raw(),
            DynamicImage::ImageLuma8(b) => b.into_raw().into_iter().map(u16::from).collect(),
            other => {
                return Err(PlacementError::Format(format!(
                    "{}: segmentation must be single-channel, got {:?}",
                    png.display(),
                    other.color()
                )))
            }
        };
        Self::new(w, h, labels, class_table)
    }

    pub fn save(&self, png: &Path, table: &Path) -> Result<(), PlacementError> {
        let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
            ImageBuffer::from_raw(self.width, self.height, self.labels.clone()).expect("sized buffer");
        buf.save(png).map_err(|e| io_err(png, e))?;
        let named: BTreeMap<String, &String> =
            self.class_table.iter().map(|(k, v)| (k.to_string(), v)).collect();
        let json = serde_json::to_string_pretty(&named).expect("string map serializes");
        std::fs::write(table, json).map_err(|e| io_err(table, e))
    }
}

/// Relative depth per pixel. Raw grids store f32 on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: u32,
    height: u32,
    values: Vec<f64>,
}

impl DepthMap {
    pub fn new(width: u32, height: u32, values: Vec<f64>) -> Result<Self, PlacementError> {
        if values.len() != width as usize * height as usize {
            return Err(PlacementError::DimensionMismatch(format!(
                "{} depth values for a {width}x{height} map",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(PlacementError::Format(format!(
                "depth values must be finite and non-negative, found {v}"
            )));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> f64) -> Result<Self, PlacementError> {
        let values = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::new(width, height, values)
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.values[y as usize * self.width as usize + x as usize]
    }

    /// Reads either a raw `DPTH` grid (magic, u32 width, u32 height, then
    /// little-endian f32 values row-major) or a 16-bit PNG holding depth x 1000.
    pub fn load(path: &Path) -> Result<Self, PlacementError> {
        let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
        if bytes.starts_with(DEPTH_MAGIC) {
            return Self::decode_grid(&bytes)
                .map_err(|e| PlacementError::Format(format!("{}: {e}", path.display())));
        }
        let img = image::load_from_memory(&bytes).map_err(|e| io_err(path, e))?;
        let (w, h) = (img.width(), img.height());
        let values = match img {
            DynamicImage::ImageLuma16(b) => b.into_raw().into_iter().map(|v| v as f64 / 1000.0).collect(),
            DynamicImage::ImageLuma8(b) => b.into_raw().into_iter().map(|v| v as f64 / 1000.0).collect(),
            other => {
                return Err(PlacementError::Format(format!(
                    "{}: depth PNG must be single-channel, got {:?}",
                    path.display(),
                    other.color()
                )))
            }
        };
        Self::new(w, h, values)
    }

    fn decode_grid(bytes: &[u8]) -> Result<Self, String> {
        if bytes.len() < 12 {
            return Err("truncated header".into());
        }
        let w = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
        let h = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
        let n = w as usize * h as usize;
        let body = &bytes[12..];
        if body.len() != n * 4 {
            return Err(format!("expected {} value bytes for {w}x{h}, found {}", n * 4, body.len()));
        }
        let values = body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
            .collect();
        Self::new(w, h, values).map_err(|e| e.to_string())
    }

    pub fn encode_grid(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + self.values.len() * 4);
        out.extend_from_slice(DEPTH_MAGIC);
        out.extend_from_slice(&self.width.to_le_bytes());
        out.extend_from_slice(&self.height.to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&(*v as f32).to_le_bytes());
        }
        out
    }

    pub fn save_grid(&self, path: &Path) -> Result<(), PlacementError> {
        std::fs::write(path, self.encode_grid()).map_err(|e| io_err(path, e))
    }

    /// 16-bit PNG of `round(depth * 1000)`, saturating at 65535.
    pub fn save_png(&self, path: &Path) -> Result<(), PlacementError> {
        let raw: Vec<u16> = self
            .values
            .iter()
            .map(|v| (v * 1000.0).round().clamp(0.0, 65535.0) as u16)
            .collect();
        let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
            ImageBuffer::from_raw(self.width, self.height, raw).expect("sized buffer");
        buf.save(path).map_err(|e| io_err(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> BTreeMap<u16, String> {
        [(0, "sky".to_string()), (300, "wall".to_string())].into()
    }

    #[test]
    fn seg_rejects_unknown_ids() {
        assert!(SegmentationMap::new(2, 1, vec![0, 7], table()).is_err());
        assert!(SegmentationMap::new(2, 2, vec![0, 300], table()).is_err());
    }

    #[test]
    fn seg_and_depth_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let seg = SegmentationMap::from_fn(9, 5, table(), |x, _| if x > 3 { 300 } else { 0 }).unwrap();
        seg.save(&dir.path().join("s.png"), &dir.path().join("s.json")).unwrap();
        let back = SegmentationMap::load(&dir.path().join("s.png"), &dir.path().join("s.json")).unwrap();
        assert_eq!(back, seg);

        let depth = DepthMap::from_fn(9, 5, |x, y| 1.5 + x as f64 * 0.25 + y as f64).unwrap();
        depth.save_grid(&dir.path().join("d.bin")).unwrap();
        assert_eq!(DepthMap::load(&dir.path().join("d.bin")).unwrap(), depth);
        depth.save_png(&dir.path().join("d.png")).unwrap();
        let png = DepthMap::load(&dir.path().join("d.png")).unwrap();
        assert!((png.get(8, 4) - depth.get(8, 4)).abs() < 1e-3);
    }

    #[test]
    fn grid_header_layout() {
        let d = DepthMap::new(2, 1, vec![1.0, 2.0]).unwrap();
        let b = d.encode_grid();
        assert_eq!(&b[..4], b"DPTH");
        assert_eq!(&b[4..12], &[2, 0, 0, 0, 1, 0, 0, 0]);
        assert_eq!(b.len(), 12 + 8);
        assert!(DepthMap::decode_grid(&b[..15]).is_err());
        assert!(DepthMap::new(1, 1, vec![f64::NAN]).is_err());
        assert!(DepthMap::new(1, 1, vec![-1.0]).is_err());
    }
}
