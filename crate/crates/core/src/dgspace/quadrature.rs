use crate::error::{Error, Result};
use crate::mesh::{Point2, PolyMesh};
use std::sync::OnceLock;

/// Highest polynomial exactness supported by the element rules.
pub const MAX_ORDER: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<Point2>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(Point2) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&p, w)| w * f(p)).sum()
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one point");
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Collapsed (Duffy) tensor rule on the reference triangle (0,0),(1,0),(0,1),
/// returned as (barycentric-like (s, t), weight) with total weight 1/2.
fn reference_triangle(order: usize) -> &'static [(f64, f64, f64)] {
    static CACHE: OnceLock<Vec<Vec<(f64, f64, f64)>>> = OnceLock::new();
    let all = CACHE.get_or_init(|| {
        (0..=MAX_ORDER)
            .map(|q| {
                let (xu, wu) = gauss_legendre((q + 1).div_ceil(2).max(1));
                // the collapse Jacobian adds one degree in t
                let (xv, wv) = gauss_legendre((q + 2).div_ceil(2));
                let mut rule = Vec::with_capacity(xu.len() * xv.len());
                for (v, wvj) in xv.iter().zip(&wv) {
                    let t = 0.5 * (v + 1.0);
                    for (u, wui) in xu.iter().zip(&wu) {
                        let s = 0.5 * (u + 1.0) * (1.0 - t);
                        rule.push((s, t, 0.25 * wui * wvj * (1.0 - t)));
                    }
                }
                rule
            })
            .collect()
    });
    &all[order]
}

fn check_order(order: usize) -> Result<()> {
    if order > MAX_ORDER {
        Err(Error::UnsupportedOrder(order))
    } else {
        Ok(())
    }
}

/// Rule on an arbitrary triangle, exact for polynomials of total degree
/// `order`.
pub fn triangle_rule(tri: [Point2; 3], order: usize) -> Result<QuadratureRule> {
    check_order(order)?;
    let mut rule = QuadratureRule {
        points: Vec::new(),
        weights: Vec::new(),
    };
    push_triangle(&mut rule, tri, order);
    Ok(rule)
}

fn push_triangle(rule: &mut QuadratureRule, [a, b, c]: [Point2; 3], order: usize) {
    let e1 = b - a;
    let e2 = c - a;
    let jac = e1.cross(e2).abs();
    for &(s, t, w) in reference_triangle(order) {
        rule.points.push(a + e1 * s + e2 * t);
        rule.weights.push(w * jac);
    }
}

/// Volume rule on element `e`: the triangle rule mapped onto every
/// sub-triangle and concatenated.
pub fn element_rule(mesh: &PolyMesh, e: usize, order: usize) -> Result<QuadratureRule> {
    check_order(order)?;
    let tris = mesh.sub_triangles(e);
    let per = reference_triangle(order).len();
    let mut rule = QuadratureRule {
        points: Vec::with_capacity(per * tris.len()),
        weights: Vec::with_capacity(per * tris.len()),
    };
    for t in tris {
        push_triangle(&mut rule, mesh.triangle_points(t), order);
    }
    Ok(rule)
}

/// Gauss–Legendre rule with ceil((order+1)/2) points on the segment a-b.
pub fn segment_rule(a: Point2, b: Point2, order: usize) -> QuadratureRule {
    let (x, w) = gauss_legendre((order + 1).div_ceil(2).max(1));
    let half = 0.5 * a.dist(b);
    QuadratureRule {
        points: x.iter().map(|&s| a + (b - a) * (0.5 * (s + 1.0))).collect(),
        weights: w.iter().map(|wi| wi * half).collect(),
    }
}

pub fn face_rule(mesh: &PolyMesh, f: usize, order: usize) -> QuadratureRule {
    let [u, v] = mesh.faces()[f].endpoints;
    segment_rule(mesh.vertices()[u], mesh.vertices()[v], order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::PolyMesh;

    #[test]
    fn gauss_legendre_integrates_monomials() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            for k in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(k as i32)).sum();
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-14, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn reference_triangle_exactness() {
        // int over reference triangle of s^a t^b = a! b! / (a+b+2)!
        let fact = |n: usize| (1..=n).map(|k| k as f64).product::<f64>();
        for q in 0..=MAX_ORDER {
            for a in 0..=q {
                let b = q - a;
                let got: f64 = reference_triangle(q).iter().map(|&(s, t, w)| w * s.powi(a as i32) * t.powi(b as i32)).sum();
                let exact = fact(a) * fact(b) / fact(a + b + 2);
                assert!((got - exact).abs() <= 1e-13 * exact, "q={q} a={a}");
            }
        }
    }

    #[test]
    fn unit_square_moments() {
        let sq = PolyMesh::from_loops(
            vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(1.0, 1.0), Point2::new(0.0, 1.0)],
            vec![vec![0, 1, 2, 3]],
            None,
        )
        .unwrap();
        let r = element_rule(&sq, 0, 1).unwrap();
        assert!((r.integrate(|_| 1.0) - 1.0).abs() < 1e-14);
        let r = element_rule(&sq, 0, 3).unwrap();
        assert!((r.integrate(|p| p.x * p.x * p.y) - 1.0 / 6.0).abs() < 1e-14);
        assert!(matches!(element_rule(&sq, 0, 21), Err(Error::UnsupportedOrder(21))));
    }

    #[test]
    fn segment_moments() {
        let r = segment_rule(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), 2);
        assert_eq!(r.len(), 2);
        assert!((r.integrate(|_| 1.0) - 1.0).abs() < 1e-15);
        assert!((r.integrate(|p| p.x * p.x) - 1.0 / 3.0).abs() < 1e-15);
    }
}
