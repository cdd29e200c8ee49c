use super::geometry::{is_convex, loop_is_simple, orient2d, polygon_centroid, signed_area, Point2};
use crate::error::{Error, Result};

/// Local plan for splitting one polygon into triangles. Indices refer to the
/// polygon's own vertex list; `CENTROID` marks the element centroid.
pub(crate) const CENTROID: usize = usize::MAX;

pub(crate) fn plan(pts: &[Point2]) -> Result<Vec<[usize; 3]>> {
    let n = pts.len();
    if n < 3 {
        return Err(Error::MeshValidity(format!("polygon with {n} vertices")));
    }
    if n == 3 {
        return Ok(vec![[0, 1, 2]]);
    }
    let ids: Vec<usize> = (0..n).collect();
    if !loop_is_simple(&ids, pts) {
        return Err(Error::MeshValidity("self-intersecting polygon".into()));
    }
    if signed_area(pts) <= 0.0 {
        return Err(Error::MeshValidity("polygon is not counter-clockwise".into()));
    }
    if is_convex(pts) {
        return Ok((0..n)
            .filter(|&i| pts[i] != pts[(i + 1) % n])
            .map(|i| [CENTROID, i, (i + 1) % n])
            .collect());
    }
    ear_clip(pts)
}

fn ear_clip(pts: &[Point2]) -> Result<Vec<[usize; 3]>> {
    let mut ring: Vec<usize> = (0..pts.len()).collect();
    let mut out = Vec::with_capacity(pts.len() - 2);
    while ring.len() > 3 {
        let m = ring.len();
        let mut clipped = false;
        for k in 0..m {
            let (ia, ib, ic) = (ring[(k + m - 1) % m], ring[k], ring[(k + 1) % m]);
            let (a, b, c) = (pts[ia], pts[ib], pts[ic]);
            if orient2d(a, b, c) <= 0.0 {
                continue;
            }
            let blocked = ring.iter().any(|&j| {
                if j == ia || j == ib || j == ic {
                    return false;
                }
                let p = pts[j];
                if p == a || p == b || p == c {
                    return false;
                }
                orient2d(a, b, p) >= 0.0 && orient2d(b, c, p) >= 0.0 && orient2d(c, a, p) >= 0.0
            });
            if !blocked {
                out.push([ia, ib, ic]);
                ring.remove(k);
                clipped = true;
                break;
            }
        }
        if !clipped {
            // only degenerate (collinear) tips remain
            let k = (0..m).find(|&k| {
                let (ia, ib, ic) = (ring[(k + m - 1) % m], ring[k], ring[(k + 1) % m]);
                orient2d(pts[ia], pts[ib], pts[ic]) == 0.0
            });
            match k {
                Some(k) => {
                    ring.remove(k);
                }
                None => return Err(Error::MeshValidity("ear clipping found no ear".into())),
            }
        }
    }
    if orient2d(pts[ring[0]], pts[ring[1]], pts[ring[2]]) > 0.0 {
        out.push([ring[0], ring[1], ring[2]]);
    }
    Ok(out)
}

/// Splits a simple counter-clockwise polygon into positively oriented
/// triangles: a triangle maps to itself, convex polygons are fanned from
/// their centroid, anything else is ear-clipped.
pub fn subtriangulate(pts: &[Point2]) -> Result<Vec<[Point2; 3]>> {
    let c = polygon_centroid(pts);
    let at = |i: usize| if i == CENTROID { c } else { pts[i] };
    Ok(plan(pts)?
        .into_iter()
        .map(|t| [at(t[0]), at(t[1]), at(t[2])])
        .collect())
}
