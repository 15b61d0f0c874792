use std::path::{Path, PathBuf};

use super::{AnnotationRecord, DatasetError};
use crate::geometry::{Point, Quad};
use crate::imageio::write_atomic;

/// `x1,y1,...,x4,y4,transcript` with integer-rounded coordinates, clockwise
/// from the reading-order top-left vertex. The transcript goes last, as is.
pub fn icdar_line(quad: &Quad, transcript: &str) -> String {
    let mut s = String::new();
    for p in quad.reading_order() {
        s.push_str(&format!("{},{},", p.x.round() as i64, p.y.round() as i64));
    }
    s.push_str(transcript);
    s
}

/// Parses one annotation line. Eight coordinates are required; the
/// transcript is everything after the eighth comma and may be absent.
pub fn parse_icdar_line(line: &str) -> Result<(Quad, String), String> {
    let line = line.trim_start_matches('\u{feff}').trim_end_matches(['\r', '\n']);
    let mut parts = line.splitn(9, ',');
    let mut c = [0.0; 8];
    for (i, v) in c.iter_mut().enumerate() {
        let field = parts.next().ok_or_else(|| format!("expected 8 coordinates, found {i}"))?;
        *v = field
            .trim()
            .parse::<f64>()
            .map_err(|_| format!("coordinate {} is not a number: {field:?}", i + 1))?;
    }
    let transcript = parts.next().unwrap_or("").to_string();
    let quad = Quad::new([
        Point::new(c[0], c[1]),
        Point::new(c[2], c[3]),
        Point::new(c[4], c[5]),
        Point::new(c[6], c[7]),
    ])
    .map_err(|e| e.to_string())?;
    Ok((quad, transcript))
}

/// Reads an annotation file; blank lines are ignored.
pub fn read_icdar_file(path: &Path) -> Result<Vec<(Quad, String)>, DatasetError> {
    let text = std::fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            parse_icdar_line(l).map_err(|e| DatasetError::Annotation(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}

pub fn icdar_text(record: &AnnotationRecord) -> String {
    record
        .instances
        .iter()
        .map(|i| icdar_line(&i.quad, &i.transcript) + "\n")
        .collect()
}

/// Writes `gt_<image_id>.txt` per record into `dir` (empty files for
/// records without instances).
pub fn write_icdar_annotations(records: &[AnnotationRecord], dir: &Path) -> Result<Vec<PathBuf>, DatasetError> {
    std::fs::create_dir_all(dir).map_err(|e| DatasetError::io(dir, e))?;
    records
        .iter()
        .map(|r| {
            let path = dir.join(format!("gt_{}.txt", r.image_id));
            write_atomic(&path, icdar_text(r).as_bytes()).map_err(|e| DatasetError::io(&path, e))?;
            Ok(path)
        })
        .collect()
}
