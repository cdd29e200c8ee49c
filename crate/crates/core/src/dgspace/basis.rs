use super::quadrature::element_rule;
use crate::error::{Error, Result};
use crate::linalg::{cholesky_in_place, lower_triangular_inverse, matmul};
use crate::mesh::{Point2, PolyMesh};

/// Number of polynomials of total degree at most `p` in two variables.
pub const fn n_loc(p: usize) -> usize {
    (p + 1) * (p + 2) / 2
}

/// Exponents (a, b) of the generating monomials, ordered by total degree so
/// that the first `n_loc(q)` entries span degree `q` for every `q <= p`.
pub fn monomial_exponents(p: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n_loc(p));
    for d in 0..=p {
        for b in 0..=d {
            out.push((d - b, b));
        }
    }
    out
}

/// Orthonormal modal basis on one element: phi_i = sum_{k<=i} C[i][k] m_k with
/// m_k the monomials in centroid-shifted coordinates scaled by h/2.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementBasis {
    center: Point2,
    inv_scale: f64,
    p: usize,
    exps: Vec<(usize, usize)>,
    coeffs: Vec<f64>,
}

impl ElementBasis {
    /// Orthonormalises the scaled monomials of degree <= p on element `e`.
    /// Returns the basis and a condition estimate of the raw mass matrix.
    pub fn build(mesh: &PolyMesh, e: usize, p: usize) -> Result<(Self, f64)> {
        let el = mesh.element(e);
        let n = n_loc(p);
        let mut basis = ElementBasis {
            center: el.centroid,
            inv_scale: 2.0 / el.diameter,
            p,
            exps: monomial_exponents(p),
            coeffs: Vec::new(),
        };
        let rule = element_rule(mesh, e, 2 * p)?;
        let mut vals = vec![0.0; n * rule.len()];
        for (q, &x) in rule.points.iter().enumerate() {
            basis.monomials(x, &mut vals[q * n..(q + 1) * n]);
        }
        let mut mass = vec![0.0; n * n];
        for (q, w) in rule.weights.iter().enumerate() {
            let m = &vals[q * n..(q + 1) * n];
            for i in 0..n {
                for j in 0..=i {
                    mass[i * n + j] += w * m[i] * m[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                mass[j * n + i] = mass[i * n + j];
            }
        }

        let degenerate = |k: usize| Error::DegenerateElement {
            element: e,
            msg: format!("local mass matrix is numerically singular at mode {k}"),
        };
        let mut l = mass.clone();
        cholesky_in_place(&mut l, n).map_err(degenerate)?;
        let diag: Vec<f64> = (0..n).map(|i| l[i * n + i]).collect();
        let (lo, hi) = diag.iter().fold((f64::MAX, 0.0f64), |(a, b), &d| (a.min(d), b.max(d)));
        let cond = (hi / lo).powi(2);
        let mut c = lower_triangular_inverse(&l, n);

        // one re-orthogonalisation pass against the same mass matrix
        let cm = matmul(&c, &mass, n);
        let mut m2 = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                m2[i * n + j] = (0..n).map(|k| cm[i * n + k] * c[j * n + k]).sum();
            }
        }
        cholesky_in_place(&mut m2, n).map_err(degenerate)?;
        c = matmul(&lower_triangular_inverse(&m2, n), &c, n);
        basis.coeffs = c;
        Ok((basis, cond))
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn n_loc(&self) -> usize {
        self.exps.len()
    }

    fn scaled(&self, x: Point2) -> (f64, f64) {
        ((x.x - self.center.x) * self.inv_scale, (x.y - self.center.y) * self.inv_scale)
    }

    fn powers(&self, t: f64) -> [f64; 9] {
        let mut pw = [1.0; 9];
        for k in 1..=self.p {
            pw[k] = pw[k - 1] * t;
        }
        pw
    }

    fn monomials(&self, x: Point2, out: &mut [f64]) {
        let (s, t) = self.scaled(x);
        let (ps, pt) = (self.powers(s), self.powers(t));
        for (o, &(a, b)) in out.iter_mut().zip(&self.exps) {
            *o = ps[a] * pt[b];
        }
    }

    /// Values of every basis function at `x`.
    pub fn eval(&self, x: Point2, out: &mut [f64]) {
        let n = self.n_loc();
        let mut m = [0.0; 45];
        self.monomials(x, &mut m[..n]);
        for i in 0..n {
            let row = &self.coeffs[i * n..i * n + i + 1];
            out[i] = row.iter().zip(&m).map(|(c, v)| c * v).sum();
        }
    }

    /// Values and Cartesian gradients of every basis function at `x`.
    pub fn eval_grad(&self, x: Point2, val: &mut [f64], gx: &mut [f64], gy: &mut [f64]) {
        let n = self.n_loc();
        let (s, t) = self.scaled(x);
        let (ps, pt) = (self.powers(s), self.powers(t));
        let (mut m, mut mx, mut my) = ([0.0; 45], [0.0; 45], [0.0; 45]);
        for (k, &(a, b)) in self.exps.iter().enumerate() {
            m[k] = ps[a] * pt[b];
            mx[k] = if a > 0 { a as f64 * ps[a - 1] * pt[b] * self.inv_scale } else { 0.0 };
            my[k] = if b > 0 { b as f64 * ps[a] * pt[b - 1] * self.inv_scale } else { 0.0 };
        }
        for i in 0..n {
            let row = &self.coeffs[i * n..i * n + i + 1];
            let (mut v, mut dx, mut dy) = (0.0, 0.0, 0.0);
            for (k, c) in row.iter().enumerate() {
                v += c * m[k];
                dx += c * mx[k];
                dy += c * my[k];
            }
            val[i] = v;
            gx[i] = dx;
            gy[i] = dy;
        }
    }
}
