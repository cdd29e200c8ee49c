use super::geometry::{polygon_centroid, Point2};
use super::PolyMesh;
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_LLOYD_ITERS: usize = 20;

/// Vertex snapping radius used when gluing independently clipped Voronoi
/// cells into one conforming mesh.
const SNAP_TOL: f64 = 1e-10;
const MAX_RETRIES: usize = 10;

/// n x n squares, each split along the same diagonal into two triangles.
pub fn generate_structured_triangular(n: usize) -> Result<PolyMesh> {
    if n == 0 {
        return Err(Error::InvalidArgument("structured mesh needs n >= 1".into()));
    }
    let np = n + 1;
    let mut vertices = Vec::with_capacity(np * np);
    for j in 0..np {
        for i in 0..np {
            vertices.push(Point2::new(i as f64 / n as f64, j as f64 / n as f64));
        }
    }
    let id = |i: usize, j: usize| j * np + i;
    let mut loops = Vec::with_capacity(2 * n * n);
    let mut sub_tri = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let t0 = [id(i, j), id(i + 1, j), id(i + 1, j + 1)];
            let t1 = [id(i, j), id(i + 1, j + 1), id(i, j + 1)];
            loops.push(t0.to_vec());
            loops.push(t1.to_vec());
            sub_tri.push(vec![t0]);
            sub_tri.push(vec![t1]);
        }
    }
    PolyMesh::from_loops(vertices, loops, Some(sub_tri))
}

/// Clipped Voronoi mesh of `n_seeds` uniformly random seeds in the unit
/// square after `lloyd_iters` centroidal relaxation sweeps.
pub fn generate_voronoi_lloyd(n_seeds: usize, lloyd_iters: usize, rng_seed: u64) -> Result<PolyMesh> {
    if n_seeds < 4 {
        return Err(Error::InvalidArgument("Voronoi mesh needs at least 4 seeds".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let seeds: Vec<Point2> = (0..n_seeds)
        .map(|_| Point2::new(rng.random::<f64>(), rng.random::<f64>()))
        .collect();
    voronoi_with_retries(seeds, lloyd_iters, &mut rng)
}

/// Clipped Voronoi mesh of the given seeds after `lloyd_iters` sweeps.
pub fn voronoi_from_seeds(seeds: &[Point2], lloyd_iters: usize) -> Result<PolyMesh> {
    if seeds.len() < 4 {
        return Err(Error::InvalidArgument("Voronoi mesh needs at least 4 seeds".into()));
    }
    if seeds.iter().any(|p| !(p.x > 0.0 && p.x < 1.0 && p.y > 0.0 && p.y < 1.0)) {
        return Err(Error::InvalidArgument("seeds must lie inside the unit square".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    voronoi_with_retries(seeds.to_vec(), lloyd_iters, &mut rng)
}

fn voronoi_with_retries(mut seeds: Vec<Point2>, lloyd_iters: usize, rng: &mut ChaCha8Rng) -> Result<PolyMesh> {
    let mut last_err = None;
    for attempt in 0..=MAX_RETRIES {
        if attempt > 0 {
            log::warn!("Voronoi generation retry {attempt}: {}", last_err.as_ref().unwrap());
            let scale = 1e-7 / (seeds.len() as f64).sqrt();
            for s in &mut seeds {
                s.x = (s.x + scale * (rng.random::<f64>() - 0.5)).clamp(1e-9, 1.0 - 1e-9);
                s.y = (s.y + scale * (rng.random::<f64>() - 0.5)).clamp(1e-9, 1.0 - 1e-9);
            }
        }
        match try_voronoi(&seeds, lloyd_iters) {
            Ok(m) => return Ok(m),
            Err(e) => last_err = Some(e),
        }
    }
    Err(Error::Generator(format!(
        "degenerate seed configuration after {MAX_RETRIES} retries: {}",
        last_err.unwrap()
    )))
}

fn try_voronoi(seeds: &[Point2], lloyd_iters: usize) -> Result<PolyMesh> {
    let mut seeds = seeds.to_vec();
    for _ in 0..lloyd_iters {
        let cells = clipped_cells(&seeds)?;
        for (s, c) in seeds.iter_mut().zip(&cells) {
            *s = polygon_centroid(c);
        }
    }
    let cells = clipped_cells(&seeds)?;
    glue_cells(&cells)
}

struct SeedGrid {
    n: usize,
    cell: f64,
    buckets: Vec<Vec<usize>>,
}

impl SeedGrid {
    fn new(seeds: &[Point2]) -> Self {
        let n = (((seeds.len() as f64) / 2.0).sqrt().ceil() as usize).max(1);
        let cell = 1.0 / n as f64;
        let mut buckets = vec![Vec::new(); n * n];
        for (k, p) in seeds.iter().enumerate() {
            let (i, j) = Self::coords(n, cell, *p);
            buckets[j * n + i].push(k);
        }
        SeedGrid { n, cell, buckets }
    }

    fn coords(n: usize, cell: f64, p: Point2) -> (usize, usize) {
        (
            ((p.x / cell) as usize).min(n - 1),
            ((p.y / cell) as usize).min(n - 1),
        )
    }
}

/// Keeps the part of a convex polygon on the side of seed `a` of the
/// bisector between `a` and `b`.
fn clip_by_bisector(poly: &[Point2], a: Point2, b: Point2, out: &mut Vec<Point2>) {
    let nrm = b - a;
    let mid = (a + b) * 0.5;
    let side = |p: Point2| (p - mid).dot(nrm);
    out.clear();
    let n = poly.len();
    for k in 0..n {
        let p = poly[k];
        let q = poly[(k + 1) % n];
        let (sp, sq) = (side(p), side(q));
        if sp <= 0.0 {
            out.push(p);
        }
        if (sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0) {
            let t = sp / (sp - sq);
            let mut x = p + (q - p) * t;
            // keep points on the square's sides exactly on them
            if p.x == q.x {
                x.x = p.x;
            }
            if p.y == q.y {
                x.y = p.y;
            }
            out.push(x);
        }
    }
}

fn clipped_cells(seeds: &[Point2]) -> Result<Vec<Vec<Point2>>> {
    let grid = SeedGrid::new(seeds);
    let square = vec![
        Point2::new(0.0, 0.0),
        Point2::new(1.0, 0.0),
        Point2::new(1.0, 1.0),
        Point2::new(0.0, 1.0),
    ];
    let mut cells = Vec::with_capacity(seeds.len());
    let mut buf = Vec::new();
    let mut ring = Vec::new();
    for (k, &s) in seeds.iter().enumerate() {
        let (ci, cj) = SeedGrid::coords(grid.n, grid.cell, s);
        let mut poly = square.clone();
        for r in 0..grid.n {
            ring.clear();
            let (i0, i1) = (ci.saturating_sub(r), (ci + r).min(grid.n - 1));
            let (j0, j1) = (cj.saturating_sub(r), (cj + r).min(grid.n - 1));
            for j in j0..=j1 {
                for i in i0..=i1 {
                    if i.abs_diff(ci).max(j.abs_diff(cj)) != r {
                        continue;
                    }
                    ring.extend(grid.buckets[j * grid.n + i].iter().copied().filter(|&o| o != k));
                }
            }
            ring.sort_by(|&x, &y| s.dist2(seeds[x]).total_cmp(&s.dist2(seeds[y])).then(x.cmp(&y)));
            for &o in &ring {
                if s.dist2(seeds[o]) < 1e-24 {
                    return Err(Error::Generator(format!("seeds {k} and {o} coincide")));
                }
                clip_by_bisector(&poly, s, seeds[o], &mut buf);
                std::mem::swap(&mut poly, &mut buf);
            }
            let reach = poly.iter().map(|p| p.dist(s)).fold(0.0, f64::max);
            if r as f64 * grid.cell >= 2.0 * reach {
                break;
            }
        }
        if poly.len() < 3 {
            return Err(Error::Generator(format!("cell {k} collapsed")));
        }
        cells.push(poly);
    }
    Ok(cells)
}

/// Merges nearly coincident cell vertices into shared mesh vertices and
/// builds the conforming mesh.
fn glue_cells(cells: &[Vec<Point2>]) -> Result<PolyMesh> {
    let n_pts: usize = cells.iter().map(Vec::len).sum();
    let n = ((n_pts as f64).sqrt().ceil() as usize).max(1);
    let cell = 1.0 / n as f64;
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); n * n];
    let mut vertices: Vec<Point2> = Vec::new();
    let mut loops = Vec::with_capacity(cells.len());
    let key = |p: Point2| {
        (
            ((p.x / cell).floor().max(0.0) as usize).min(n - 1),
            ((p.y / cell).floor().max(0.0) as usize).min(n - 1),
        )
    };
    for poly in cells {
        let mut ids: Vec<usize> = Vec::with_capacity(poly.len());
        for &p in poly {
            let (i, j) = key(p);
            let mut found = None;
            'search: for jj in j.saturating_sub(1)..=(j + 1).min(n - 1) {
                for ii in i.saturating_sub(1)..=(i + 1).min(n - 1) {
                    for &v in &buckets[jj * n + ii] {
                        if vertices[v].dist(p) <= SNAP_TOL {
                            found = Some(v);
                            break 'search;
                        }
                    }
                }
            }
            let v = found.unwrap_or_else(|| {
                let snapped = Point2::new(snap_unit(p.x), snap_unit(p.y));
                vertices.push(snapped);
                buckets[j * n + i].push(vertices.len() - 1);
                vertices.len() - 1
            });
            if ids.last() != Some(&v) {
                ids.push(v);
            }
        }
        while ids.len() > 1 && ids.first() == ids.last() {
            ids.pop();
        }
        if ids.len() < 3 {
            return Err(Error::Generator("cell degenerated while merging vertices".into()));
        }
        loops.push(ids);
    }
    PolyMesh::from_loops(vertices, loops, None)
}

fn snap_unit(x: f64) -> f64 {
    if x.abs() < 1e-14 {
        0.0
    } else if (x - 1.0).abs() < 1e-14 {
        1.0
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structured_counts() {
        let m = generate_structured_triangular(2).unwrap();
        assert_eq!(m.n_elements(), 8);
        let area: f64 = m.elements().iter().map(|e| e.area).sum();
        assert!((area - 1.0).abs() < 1e-15);
        assert_eq!(m.faces().iter().filter(|f| f.is_boundary()).count(), 8);

        let m = generate_structured_triangular(16).unwrap();
        assert_eq!(m.n_elements(), 512);
        assert!((m.h() - 2f64.sqrt() / 16.0).abs() < 1e-15);

        let m = generate_structured_triangular(1).unwrap();
        assert_eq!(m.n_elements(), 2);
        assert_eq!(m.faces().len(), 5);
    }

    #[test]
    fn zero_rejected() {
        assert!(generate_structured_triangular(0).is_err());
    }

    #[test]
    fn four_symmetric_seeds_make_quadrants() {
        let seeds = [
            Point2::new(0.25, 0.25),
            Point2::new(0.75, 0.25),
            Point2::new(0.25, 0.75),
            Point2::new(0.75, 0.75),
        ];
        let m = voronoi_from_seeds(&seeds, 0).unwrap();
        assert_eq!(m.n_elements(), 4);
        for e in m.elements() {
            assert!((e.area - 0.25).abs() < 1e-15);
            assert_eq!(e.vertex_ids.len(), 4);
        }
        assert_eq!(m.faces().iter().filter(|f| !f.is_boundary()).count(), 4);
        assert_eq!(m.faces().iter().filter(|f| f.is_boundary()).count(), 8);
    }

    #[test]
    fn voronoi_is_deterministic_and_partitions_square() {
        let a = generate_voronoi_lloyd(200, 5, 7).unwrap();
        let b = generate_voronoi_lloyd(200, 5, 7).unwrap();
        assert_eq!(a.n_elements(), 200);
        assert_eq!(a.vertices(), b.vertices());
        assert_eq!(a.faces(), b.faces());
        let area: f64 = a.elements().iter().map(|e| e.area).sum();
        assert!((area - 1.0).abs() < 1e-10);
    }

    #[test]
    fn too_few_seeds() {
        assert!(generate_voronoi_lloyd(3, 0, 1).is_err());
    }
}
