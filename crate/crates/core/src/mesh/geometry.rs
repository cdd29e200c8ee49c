//! Planar geometry primitives shared by the mesh generators and the agglomerator.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 2-D cross product.
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn dist2(self, other: Point2) -> f64 {
        let d = self - other;
        d.dot(d)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

/// Twice the signed area of triangle (a, b, c); positive when counter-clockwise.
pub fn orient2d(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

pub fn triangle_area(a: Point2, b: Point2, c: Point2) -> f64 {
    0.5 * orient2d(a, b, c)
}

/// Signed shoelace area of a closed polygon (CCW positive).
pub fn signed_area(pts: &[Point2]) -> f64 {
    let n = pts.len();
    let mut s = 0.0;
    for i in 0..n {
        s += pts[i].cross(pts[(i + 1) % n]);
    }
    0.5 * s
}

/// Area centroid of a closed polygon. Falls back to the vertex mean for
/// zero-area input.
pub fn polygon_centroid(pts: &[Point2]) -> Point2 {
    let n = pts.len();
    // shift to the first vertex for better cancellation behaviour
    let o = pts[0];
    let mut a = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let p = pts[i] - o;
        let q = pts[(i + 1) % n] - o;
        let w = p.cross(q);
        a += w;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    if a.abs() < f64::MIN_POSITIVE {
        let s = pts.iter().fold(Point2::default(), |acc, &p| acc + p);
        return s * (1.0 / n as f64);
    }
    Point2::new(o.x + cx / (3.0 * a), o.y + cy / (3.0 * a))
}

/// Exact polygon diameter: maximum pairwise vertex distance.
pub fn diameter(pts: &[Point2]) -> f64 {
    let mut d2: f64 = 0.0;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            d2 = d2.max(pts[i].dist2(pts[j]));
        }
    }
    d2.sqrt()
}

pub fn is_convex(pts: &[Point2]) -> bool {
    let n = pts.len();
    (0..n).all(|i| orient2d(pts[i], pts[(i + 1) % n], pts[(i + 2) % n]) >= 0.0)
}

/// True when segments [a,b] and [c,d] cross at a single interior point of both.
pub fn segments_cross_properly(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let d1 = orient2d(a, b, c);
    let d2 = orient2d(a, b, d);
    let d3 = orient2d(c, d, a);
    let d4 = orient2d(c, d, b);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Distance from `p` to segment [a,b] and the projection parameter along it.
pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> (f64, f64) {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return (p.dist(a), 0.0);
    }
    let t = (p - a).dot(ab) / len2;
    let tc = t.clamp(0.0, 1.0);
    (p.dist(a + ab * tc), t)
}

/// Checks a closed vertex loop for proper self-intersections. Edges meeting
/// at a shared vertex id (weakly simple loops that touch themselves at a
/// vertex) are tolerated.
pub fn loop_is_simple(ids: &[usize], vertices: &[Point2]) -> bool {
    let n = ids.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let (a0, a1) = (ids[i], ids[(i + 1) % n]);
        for j in (i + 1)..n {
            let (b0, b1) = (ids[j], ids[(j + 1) % n]);
            if a0 == b0 || a0 == b1 || a1 == b0 || a1 == b1 {
                continue;
            }
            if segments_cross_properly(vertices[a0], vertices[a1], vertices[b0], vertices[b1]) {
                return false;
            }
        }
    }
    true
}
