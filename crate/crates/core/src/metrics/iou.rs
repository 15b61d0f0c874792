use crate::geometry::{Point, Quad};

/// Shoelace area, orientation-independent.
pub fn convex_area(poly: &[Point]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let n = poly.len();
    let s: f64 = (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a.x * b.y - b.x * a.y
        })
        .sum();
    s.abs() / 2.0
}

fn orient_clockwise(poly: &[Point]) -> Vec<Point> {
    let n = poly.len();
    let s: f64 = (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a.x * b.y - b.x * a.y
        })
        .sum();
    let mut v = poly.to_vec();
    if s < 0.0 {
        v.reverse();
    }
    v
}

/// Intersection of two convex polygons by successive half-plane cuts of
/// `subject` against each edge of `clip`.
pub fn clip_convex(subject: &[Point], clip: &[Point]) -> Vec<Point> {
    let clip = orient_clockwise(clip);
    let mut out = orient_clockwise(subject);
    let n = clip.len();
    for i in 0..n {
        if out.is_empty() {
            break;
        }
        let (a, b) = (clip[i], clip[(i + 1) % n]);
        // Inside is the right-hand side in y-down coordinates (cross >= 0).
        let side = |p: Point| (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
        let input = std::mem::take(&mut out);
        for j in 0..input.len() {
            let cur = input[j];
            let prev = input[(j + input.len() - 1) % input.len()];
            let (sc, sp) = (side(cur), side(prev));
            if sc >= 0.0 {
                if sp < 0.0 {
                    out.push(intersect(prev, cur, sp, sc));
                }
                out.push(cur);
            } else if sp >= 0.0 {
                out.push(intersect(prev, cur, sp, sc));
            }
        }
    }
    out
}

fn intersect(p: Point, q: Point, sp: f64, sq: f64) -> Point {
    let t = sp / (sp - sq);
    Point::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y))
}

/// IoU of two convex polygons. Degenerate input scores 0 with a warning.
pub fn polygon_iou_points(a: &[Point], b: &[Point]) -> f64 {
    let (area_a, area_b) = (convex_area(a), convex_area(b));
    if !(area_a > 0.0 && area_b > 0.0) {
        tracing::warn!("degenerate polygon in IoU computation");
        return 0.0;
    }
    let inter = convex_area(&clip_convex(a, b));
    let union = area_a + area_b - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

pub fn polygon_iou(a: &Quad, b: &Quad) -> f64 {
    polygon_iou_points(a.points(), b.points())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(c: [f64; 8]) -> Quad {
        Quad::from_coords(c).unwrap()
    }

    #[test]
    fn iou_examples() {
        let a = q([0., 0., 1., 0., 1., 1., 0., 1.]);
        assert_eq!(polygon_iou(&a, &a), 1.0);
        let far = q([5., 5., 6., 5., 6., 6., 5., 6.]);
        assert_eq!(polygon_iou(&a, &far), 0.0);
        let shifted = q([0.5, 0., 1.5, 0., 1.5, 1., 0.5, 1.]);
        assert!((polygon_iou(&a, &shifted) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_polygon_scores_zero() {
        let line = [Point::new(0., 0.), Point::new(1., 1.), Point::new(2., 2.), Point::new(3., 3.)];
        let sq = [Point::new(0., 0.), Point::new(1., 0.), Point::new(1., 1.), Point::new(0., 1.)];
        assert_eq!(polygon_iou_points(&line, &sq), 0.0);
    }

    #[test]
    fn contained_quad() {
        let outer = q([0., 0., 4., 0., 4., 4., 0., 4.]);
        let inner = q([1., 1., 3., 1., 3., 3., 1., 3.]);
        assert!((polygon_iou(&outer, &inner) - 0.25).abs() < 1e-12);
    }
}
