use super::geometry::{point_segment_distance, Point2};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Absolute tolerance for vertex coincidence in unit-square coordinates.
pub const COINCIDENCE_TOL: f64 = 1e-12;

/// A straight interface segment. Endpoints are ordered counter-clockwise
/// with respect to `plus`, and `normal` points out of `plus`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Face {
    pub endpoints: [usize; 2],
    pub plus: usize,
    pub minus: Option<usize>,
    pub length: f64,
    pub normal: [f64; 2],
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.minus.is_none()
    }

    pub(crate) fn from_segment(a: usize, b: usize, plus: usize, minus: Option<usize>, vertices: &[Point2]) -> Self {
        let d = vertices[b] - vertices[a];
        let length = d.norm();
        Face {
            endpoints: [a, b],
            plus,
            minus,
            length,
            normal: [d.y / length, -d.x / length],
        }
    }
}

pub(crate) fn on_unit_square_boundary(a: Point2, b: Point2) -> bool {
    let tol = COINCIDENCE_TOL;
    let near = |u: f64, v: f64| (u - v).abs() <= tol;
    (near(a.x, 0.0) && near(b.x, 0.0))
        || (near(a.x, 1.0) && near(b.x, 1.0))
        || (near(a.y, 0.0) && near(b.y, 0.0))
        || (near(a.y, 1.0) && near(b.y, 1.0))
}

struct VertexGrid {
    cell: f64,
    n: usize,
    buckets: Vec<Vec<usize>>,
}

impl VertexGrid {
    fn new(ids: &[usize], vertices: &[Point2]) -> Self {
        let n = ((ids.len() as f64).sqrt().ceil() as usize).clamp(1, 512);
        let cell = 1.0 / n as f64;
        let mut buckets = vec![Vec::new(); n * n];
        for &v in ids {
            let (i, j) = Self::coords(cell, n, vertices[v]);
            buckets[j * n + i].push(v);
        }
        Self { cell, n, buckets }
    }

    fn coords(cell: f64, n: usize, p: Point2) -> (usize, usize) {
        let i = ((p.x / cell).floor().max(0.0) as usize).min(n - 1);
        let j = ((p.y / cell).floor().max(0.0) as usize).min(n - 1);
        (i, j)
    }

    fn near_segment(&self, a: Point2, b: Point2, out: &mut Vec<usize>) {
        out.clear();
        let lo = Point2::new(a.x.min(b.x) - COINCIDENCE_TOL, a.y.min(b.y) - COINCIDENCE_TOL);
        let hi = Point2::new(a.x.max(b.x) + COINCIDENCE_TOL, a.y.max(b.y) + COINCIDENCE_TOL);
        let (i0, j0) = Self::coords(self.cell, self.n, lo);
        let (i1, j1) = Self::coords(self.cell, self.n, hi);
        for j in j0..=j1 {
            for i in i0..=i1 {
                out.extend_from_slice(&self.buckets[j * self.n + i]);
            }
        }
    }
}

/// Classifies every element edge as an interior or boundary face. Edges are
/// split at every mesh vertex lying on them so each face is a straight
/// segment shared by at most two elements.
pub fn extract_faces(elements: &[Vec<usize>], vertices: &[Point2]) -> Result<Vec<Face>> {
    let mut used: Vec<usize> = elements.iter().flatten().copied().collect();
    used.sort_unstable();
    used.dedup();
    let grid = VertexGrid::new(&used, vertices);

    // (min, max) vertex pair -> list of (element, forward orientation)
    let mut owners: HashMap<(usize, usize), Vec<(usize, bool)>> = HashMap::new();
    let mut order: Vec<(usize, usize)> = Vec::new();
    let mut cand = Vec::new();
    let mut splits: Vec<(f64, usize)> = Vec::new();

    for (e, ids) in elements.iter().enumerate() {
        let n = ids.len();
        for k in 0..n {
            let (a, b) = (ids[k], ids[(k + 1) % n]);
            if a == b {
                continue;
            }
            let (pa, pb) = (vertices[a], vertices[b]);
            grid.near_segment(pa, pb, &mut cand);
            splits.clear();
            splits.push((0.0, a));
            for &v in &cand {
                if v == a || v == b {
                    continue;
                }
                let pv = vertices[v];
                if pv.dist(pa) <= COINCIDENCE_TOL || pv.dist(pb) <= COINCIDENCE_TOL {
                    continue;
                }
                let (d, t) = point_segment_distance(pv, pa, pb);
                if d <= COINCIDENCE_TOL && t > 0.0 && t < 1.0 {
                    splits.push((t, v));
                }
            }
            splits.push((1.0, b));
            splits.sort_by(|x, y| x.0.total_cmp(&y.0));
            splits.dedup_by_key(|s| s.1);
            for w in splits.windows(2) {
                let (u, v) = (w[0].1, w[1].1);
                let key = (u.min(v), u.max(v));
                let entry = owners.entry(key).or_insert_with(|| {
                    order.push(key);
                    Vec::new()
                });
                entry.push((e, u < v));
            }
        }
    }

    let mut faces = Vec::with_capacity(order.len());
    for key in order {
        let own = &owners[&key];
        match own.as_slice() {
            [(e, fwd)] => {
                let (a, b) = if *fwd { key } else { (key.1, key.0) };
                if !on_unit_square_boundary(vertices[a], vertices[b]) {
                    return Err(Error::MeshValidity(format!(
                        "edge ({a},{b}) of element {e} has one owner but is not on the domain boundary"
                    )));
                }
                faces.push(Face::from_segment(a, b, *e, None, vertices));
            }
            [(e0, f0), (e1, f1)] => {
                if f0 == f1 || e0 == e1 {
                    return Err(Error::MeshValidity(format!(
                        "edge ({},{}) shared by elements {e0} and {e1} with inconsistent orientation",
                        key.0, key.1
                    )));
                }
                let (plus, minus, fwd) = if e0 < e1 { (*e0, *e1, *f0) } else { (*e1, *e0, *f1) };
                let (a, b) = if fwd { key } else { (key.1, key.0) };
                faces.push(Face::from_segment(a, b, plus, Some(minus), vertices));
            }
            _ => {
                return Err(Error::MeshValidity(format!(
                    "edge ({},{}) has {} owners",
                    key.0,
                    key.1,
                    own.len()
                )))
            }
        }
    }
    Ok(faces)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square_two_triangles() -> (Vec<Point2>, Vec<Vec<usize>>) {
        let v = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        (v, vec![vec![0, 1, 2], vec![0, 2, 3]])
    }

    #[test]
    fn two_triangles_give_one_interior_four_boundary() {
        let (v, e) = unit_square_two_triangles();
        let f = extract_faces(&e, &v).unwrap();
        assert_eq!(f.iter().filter(|f| f.is_boundary()).count(), 4);
        assert_eq!(f.iter().filter(|f| !f.is_boundary()).count(), 1);
        let int = f.iter().find(|f| !f.is_boundary()).unwrap();
        assert_eq!((int.plus, int.minus), (0, Some(1)));
        // outward from triangle 0 (below the diagonal) points up-left
        assert!(int.normal[0] < 0.0 && int.normal[1] > 0.0);
    }

    #[test]
    fn hanging_node_splits_edge() {
        // left: big square [0,0.5]x[0,1]; right: two squares stacked
        let v = vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.5, 0.0),
            Point2::new(0.5, 1.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 0.5),
            Point2::new(0.5, 0.5),
            Point2::new(1.0, 1.0),
        ];
        let e = vec![vec![0, 1, 2, 3], vec![1, 4, 5, 6], vec![6, 5, 7, 2]];
        let f = extract_faces(&e, &v).unwrap();
        let interior: Vec<_> = f.iter().filter(|f| !f.is_boundary()).collect();
        assert_eq!(interior.len(), 3);
        let len: f64 = interior.iter().filter(|f| f.plus == 0).map(|f| f.length).sum();
        assert!((len - 1.0).abs() < 1e-15);
    }

    #[test]
    fn three_owners_rejected() {
        let (mut v, mut e) = unit_square_two_triangles();
        v.push(Point2::new(0.7, 0.3));
        e.push(vec![0, 4, 2]);
        assert!(extract_faces(&e, &v).is_err());
    }

    #[test]
    fn interior_gap_rejected() {
        let v = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.5, 0.5),
        ];
        assert!(extract_faces(&[vec![0, 1, 2]], &v).is_err());
    }
}
