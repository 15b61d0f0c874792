use serde::{Deserialize, Serialize};

use super::GeometryError;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }
}

/// z-component of (b - a) x (c - a).
pub(crate) fn cross(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Signed shoelace area. Positive for clockwise order in image coordinates
/// (y pointing down).
pub(crate) fn signed_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    let mut s = 0.0;
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        s += a.x * b.y - b.x * a.y;
    }
    s / 2.0
}

/// Axis-aligned rectangle, `x`/`y` is the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectWH {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl RectWH {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<Self, GeometryError> {
        if !(w > 0.0 && h > 0.0) || !x.is_finite() || !y.is_finite() || !w.is_finite() || !h.is_finite() {
            return Err(GeometryError::InvalidGeometry(format!(
                "rectangle needs positive finite extent, got {w}x{h}"
            )));
        }
        Ok(Self { x, y, w, h })
    }

    pub fn center(&self) -> Point {
        Point::new(self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    /// Corners clockwise from the top-left.
    pub fn corners(&self) -> [Point; 4] {
        [
            Point::new(self.x, self.y),
            Point::new(self.x + self.w, self.y),
            Point::new(self.x + self.w, self.y + self.h),
            Point::new(self.x, self.y + self.h),
        ]
    }
}

/// Convex quadrilateral in pixel coordinates.
///
/// Vertices are stored clockwise (on screen) starting from the vertex with
/// the smallest `y`, ties broken by smallest `x`. Every constructor
/// canonicalizes, so two quads with the same vertex set compare equal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quad {
    pts: [Point; 4],
}

impl<'de> Deserialize<'de> for Quad {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            pts: [Point; 4],
        }
        let raw = Raw::deserialize(d)?;
        Quad::new(raw.pts).map_err(serde::de::Error::custom)
    }
}

impl Quad {
    /// Builds a quad from four vertices given in cyclic order (either
    /// direction). Rejects self-intersecting, non-convex and zero-area input.
    pub fn new(pts: [Point; 4]) -> Result<Self, GeometryError> {
        if pts.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(GeometryError::InvalidGeometry("non-finite vertex".into()));
        }
        let mut pts = pts;
        let area = signed_area(&pts);
        let scale = pts
            .iter()
            .flat_map(|p| [p.x.abs(), p.y.abs()])
            .fold(1.0_f64, f64::max);
        let eps = 1e-12 * scale * scale;
        if area.abs() <= eps {
            return Err(GeometryError::InvalidGeometry("quad has zero area".into()));
        }
        if area < 0.0 {
            pts.reverse();
        }
        for i in 0..4 {
            let c = cross(pts[i], pts[(i + 1) % 4], pts[(i + 2) % 4]);
            if c <= eps {
                return Err(GeometryError::InvalidGeometry(
                    "quad is not strictly convex or self-intersects".into(),
                ));
            }
        }
        let start = (0..4)
            .min_by(|&a, &b| {
                (pts[a].y, pts[a].x)
                    .partial_cmp(&(pts[b].y, pts[b].x))
                    .expect("finite")
            })
            .expect("four vertices");
        pts.rotate_left(start);
        Ok(Self { pts })
    }

    pub fn from_coords(c: [f64; 8]) -> Result<Self, GeometryError> {
        Self::new([
            Point::new(c[0], c[1]),
            Point::new(c[2], c[3]),
            Point::new(c[4], c[5]),
            Point::new(c[6], c[7]),
        ])
    }

    pub fn from_rect(r: &RectWH) -> Self {
        Self::new(r.corners()).expect("rectangle with positive extent is a valid quad")
    }

    pub fn points(&self) -> &[Point; 4] {
        &self.pts
    }

    pub fn coords(&self) -> [f64; 8] {
        let p = &self.pts;
        [p[0].x, p[0].y, p[1].x, p[1].y, p[2].x, p[2].y, p[3].x, p[3].y]
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.pts)
    }

    /// Vertices rotated so that the edge `p1 -> p2` points most nearly along
    /// +x, which is the top edge of upright or moderately tilted text.
    pub fn reading_order(&self) -> [Point; 4] {
        let start = (0..4)
            .max_by(|&a, &b| {
                let da = self.pts[(a + 1) % 4].sub(self.pts[a]);
                let db = self.pts[(b + 1) % 4].sub(self.pts[b]);
                let ca = da.x / da.x.hypot(da.y);
                let cb = db.x / db.x.hypot(db.y);
                ca.partial_cmp(&cb).expect("finite").then(b.cmp(&a))
            })
            .expect("four vertices");
        let mut out = self.pts;
        out.rotate_left(start);
        out
    }

    /// Inclusive point-in-quad test.
    pub fn contains(&self, p: Point) -> bool {
        (0..4).all(|i| cross(self.pts[i], self.pts[(i + 1) % 4], p) >= 0.0)
    }

    pub fn bounding_rect(&self) -> RectWH {
        let (mut x0, mut y0) = (f64::INFINITY, f64::INFINITY);
        let (mut x1, mut y1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.pts {
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
        RectWH {
            x: x0,
            y: y0,
            w: x1 - x0,
            h: y1 - y0,
        }
    }

    /// True when every vertex lies in `[0, w] x [0, h]`.
    pub fn within(&self, w: f64, h: f64) -> bool {
        self.pts
            .iter()
            .all(|p| p.x >= 0.0 && p.y >= 0.0 && p.x <= w && p.y <= h)
    }

    /// Applies a per-vertex map and re-validates the result.
    pub fn map(&self, f: impl Fn(Point) -> Point) -> Result<Self, GeometryError> {
        Self::new(self.pts.map(f))
    }

    /// Per-vertex map that preserves orientation and the canonical start
    /// vertex (translation plus positive uniform scale).
    pub(crate) fn map_similarity(&self, f: impl Fn(Point) -> Point) -> Self {
        Self {
            pts: self.pts.map(f),
        }
    }

    /// Rectangle of size `w` x `h` centered on `center` and rotated by
    /// `angle` radians (positive turns clockwise on screen).
    pub fn rotated_rect(center: Point, w: f64, h: f64, angle: f64) -> Result<Self, GeometryError> {
        let (s, c) = angle.sin_cos();
        let corner = |dx: f64, dy: f64| Point::new(center.x + dx * c - dy * s, center.y + dx * s + dy * c);
        Self::new([
            corner(-w / 2.0, -h / 2.0),
            corner(w / 2.0, -h / 2.0),
            corner(w / 2.0, h / 2.0),
            corner(-w / 2.0, h / 2.0),
        ])
    }
}

/// Axis-aligned bounding box of the quad's vertices.
pub fn min_enclosing_rect(quad: &Quad) -> RectWH {
    quad.bounding_rect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(c: [f64; 8]) -> Quad {
        Quad::from_coords(c).unwrap()
    }

    #[test]
    fn enclosing_rect_examples() {
        let r = min_enclosing_rect(&q([0., 0., 10., 0., 10., 4., 0., 4.]));
        assert_eq!((r.x, r.y, r.w, r.h), (0., 0., 10., 4.));
        let r = min_enclosing_rect(&q([5., 0., 10., 5., 5., 10., 0., 5.]));
        assert_eq!((r.x, r.y, r.w, r.h), (0., 0., 10., 10.));
        let r = min_enclosing_rect(&q([1., 2., 9., 1., 10., 6., 2., 7.]));
        assert_eq!((r.x, r.y, r.w, r.h), (1., 1., 9., 6.));
    }

    #[test]
    fn degenerate_quads_rejected() {
        assert!(Quad::from_coords([0., 0., 10., 0., 20., 0., 5., 0.]).is_err());
        assert!(Quad::from_coords([1., 1., 1., 1., 1., 1., 1., 1.]).is_err());
        // bow-tie
        assert!(Quad::from_coords([0., 0., 10., 10., 10., 0., 0., 10.]).is_err());
        // concave dart
        assert!(Quad::from_coords([0., 0., 10., 5., 0., 10., 3., 5.]).is_err());
    }

    #[test]
    fn canonical_order_is_clockwise_from_top() {
        let a = q([0., 4., 10., 4., 10., 0., 0., 0.]);
        assert_eq!(a.coords(), [0., 0., 10., 0., 10., 4., 0., 4.]);
        let b = q([1., 2., 9., 1., 10., 6., 2., 7.]);
        assert_eq!(b.points()[0], Point::new(9., 1.));
        assert!(b.area() > 0.0);
    }

    #[test]
    fn reading_order_starts_at_text_top_left() {
        // Text tilted upward to the right: the top-right corner is highest.
        let quad = Quad::rotated_rect(Point::new(100., 100.), 80., 20., -0.3).unwrap();
        let ro = quad.reading_order();
        assert!(ro[1].x > ro[0].x && ro[1].y < ro[0].y);
        assert!(ro[0].x < 70.0);
    }
}
