use serde::{Deserialize, Serialize};

use super::GlyphError;
use crate::geometry::{quad::cross, Point, Quad, RectWH};

/// Projective 3x3 transform acting on column vectors `(x, y, 1)`,
/// normalized so that `m[2][2] == 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Homography {
    pub m: [[f64; 3]; 3],
}

const DET_EPS: f64 = 1e-12;

impl Homography {
    pub const IDENTITY: Homography = Homography {
        m: [[1., 0., 0.], [0., 1., 0.], [0., 0., 1.]],
    };

    /// Normalizes and checks invertibility.
    pub fn new(m: [[f64; 3]; 3]) -> Result<Self, GlyphError> {
        let k = m[2][2];
        if k.abs() < DET_EPS || !k.is_finite() {
            return Err(GlyphError::SingularGeometry("h33 vanishes".into()));
        }
        let m = m.map(|r| r.map(|v| v / k));
        let h = Self { m };
        if !(h.det().abs() > DET_EPS) {
            return Err(GlyphError::SingularGeometry(format!("determinant {}", h.det())));
        }
        Ok(h)
    }

    pub fn det(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn apply(&self, p: Point) -> Point {
        let m = &self.m;
        let w = m[2][0] * p.x + m[2][1] * p.y + m[2][2];
        Point::new(
            (m[0][0] * p.x + m[0][1] * p.y + m[0][2]) / w,
            (m[1][0] * p.x + m[1][1] * p.y + m[1][2]) / w,
        )
    }

    pub fn inverse(&self) -> Result<Self, GlyphError> {
        let m = &self.m;
        let adj = [
            [
                m[1][1] * m[2][2] - m[1][2] * m[2][1],
                m[0][2] * m[2][1] - m[0][1] * m[2][2],
                m[0][1] * m[1][2] - m[0][2] * m[1][1],
            ],
            [
                m[1][2] * m[2][0] - m[1][0] * m[2][2],
                m[0][0] * m[2][2] - m[0][2] * m[2][0],
                m[0][2] * m[1][0] - m[0][0] * m[1][2],
            ],
            [
                m[1][0] * m[2][1] - m[1][1] * m[2][0],
                m[0][1] * m[2][0] - m[0][0] * m[2][1],
                m[0][0] * m[1][1] - m[0][1] * m[1][0],
            ],
        ];
        Self::new(adj)
    }

    /// `self` applied after `first`.
    pub fn compose(&self, first: &Homography) -> Result<Self, GlyphError> {
        let (a, b) = (&self.m, &first.m);
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        Self::new(out)
    }

    /// Maps `src[i]` to `dst[i]` for the four correspondences. Closed-form
    /// unit-square-to-quad construction on both sides, exact up to rounding.
    pub fn from_correspondences(src: [Point; 4], dst: [Point; 4]) -> Result<Self, GlyphError> {
        let to_dst = square_to_quad(dst)?;
        let to_src = square_to_quad(src)?;
        to_dst.compose(&to_src.inverse()?)
    }
}

fn check_general_position(p: &[Point; 4]) -> Result<(), GlyphError> {
    let scale = p
        .iter()
        .flat_map(|q| [q.x.abs(), q.y.abs()])
        .fold(1.0_f64, f64::max);
    for skip in 0..4 {
        let t: Vec<Point> = (0..4).filter(|&i| i != skip).map(|i| p[i]).collect();
        if cross(t[0], t[1], t[2]).abs() <= 1e-12 * scale * scale {
            return Err(GlyphError::SingularGeometry(
                "three correspondence points are collinear".into(),
            ));
        }
    }
    Ok(())
}

/// Maps (0,0), (1,0), (1,1), (0,1) onto `q[0..4]`.
fn square_to_quad(q: [Point; 4]) -> Result<Homography, GlyphError> {
    check_general_position(&q)?;
    let [p0, p1, p2, p3] = q;
    let sx = p0.x - p1.x + p2.x - p3.x;
    let sy = p0.y - p1.y + p2.y - p3.y;
    let m = if sx == 0.0 && sy == 0.0 {
        [
            [p1.x - p0.x, p3.x - p0.x, p0.x],
            [p1.y - p0.y, p3.y - p0.y, p0.y],
            [0.0, 0.0, 1.0],
        ]
    } else {
        let (dx1, dy1) = (p1.x - p2.x, p1.y - p2.y);
        let (dx2, dy2) = (p3.x - p2.x, p3.y - p2.y);
        let den = dx1 * dy2 - dx2 * dy1;
        let g = (sx * dy2 - dx2 * sy) / den;
        let h = (dx1 * sy - sx * dy1) / den;
        [
            [p1.x - p0.x + g * p1.x, p3.x - p0.x + h * p3.x, p0.x],
            [p1.y - p0.y + g * p1.y, p3.y - p0.y + h * p3.y, p0.y],
            [g, h, 1.0],
        ]
    };
    Homography::new(m)
}

/// Homography taking the corners of `src` (clockwise from top-left) to the
/// vertices of `dst` in reading order, so the rectangle's top edge lands on
/// the quad's top edge.
pub fn quad_homography(src: &RectWH, dst: &Quad) -> Result<Homography, GlyphError> {
    Homography::from_correspondences(src.corners(), dst.reading_order())
}
