//! Discontinuous piecewise-polynomial spaces on polygonal meshes.

mod basis;
pub mod quadrature;

pub use basis::{monomial_exponents, n_loc, ElementBasis};
pub use quadrature::{element_rule, face_rule, gauss_legendre, segment_rule, triangle_rule, QuadratureRule, MAX_ORDER};

use crate::error::{Error, Result};
use crate::mesh::{Point2, PolyMesh};
use rayon::prelude::*;
use std::sync::Arc;

pub const MAX_DEGREE: usize = 8;

/// Condition number of a raw local mass matrix above which a warning is
/// logged.
pub const MASS_COND_WARN: f64 = 1e12;

/// Total-degree-p discontinuous space with a per-element orthonormal basis.
/// Local dofs of element `e` occupy `e * n_loc .. (e + 1) * n_loc`.
#[derive(Debug, Clone)]
pub struct DGSpace {
    mesh: Arc<PolyMesh>,
    p: usize,
    bases: Vec<ElementBasis>,
}

impl DGSpace {
    pub fn new(mesh: Arc<PolyMesh>, p: usize) -> Result<Self> {
        if !(1..=MAX_DEGREE).contains(&p) {
            return Err(Error::InvalidArgument(format!("degree {p} outside 1..={MAX_DEGREE}")));
        }
        let built: Vec<(ElementBasis, f64)> = (0..mesh.n_elements())
            .into_par_iter()
            .map(|e| ElementBasis::build(&mesh, e, p))
            .collect::<Result<_>>()?;
        let mut bases = Vec::with_capacity(built.len());
        for (e, (b, cond)) in built.into_iter().enumerate() {
            if cond > MASS_COND_WARN {
                log::warn!("element {e}: local mass condition estimate {cond:.3e}");
            }
            bases.push(b);
        }
        Ok(DGSpace { mesh, p, bases })
    }

    pub fn mesh(&self) -> &PolyMesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<PolyMesh> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn n_loc(&self) -> usize {
        n_loc(self.p)
    }

    pub fn dim(&self) -> usize {
        self.mesh.n_elements() * self.n_loc()
    }

    pub fn dof_offset(&self, e: usize) -> usize {
        e * self.n_loc()
    }

    pub fn basis(&self, e: usize) -> &ElementBasis {
        &self.bases[e]
    }

    /// Default quadrature exactness for products of basis functions and data.
    pub fn quad_order(&self) -> usize {
        2 * self.p + 2
    }

    /// Value of the discrete function with coefficients `u` at `x` in element `e`.
    pub fn evaluate(&self, u: &[f64], e: usize, x: Point2) -> f64 {
        let n = self.n_loc();
        let mut v = [0.0; 45];
        self.bases[e].eval(x, &mut v[..n]);
        let off = self.dof_offset(e);
        v[..n].iter().zip(&u[off..off + n]).map(|(a, b)| a * b).sum()
    }

    /// L2 projection; with an orthonormal basis this is the load vector of `f`.
    pub fn l2_project(&self, f: impl Fn(Point2) -> f64 + Sync, order: usize) -> Result<Vec<f64>> {
        let n = self.n_loc();
        let blocks: Vec<Vec<f64>> = (0..self.mesh.n_elements())
            .into_par_iter()
            .map(|e| {
                let rule = element_rule(&self.mesh, e, order)?;
                let mut v = vec![0.0; n];
                let mut out = vec![0.0; n];
                for (&x, w) in rule.points.iter().zip(&rule.weights) {
                    self.bases[e].eval(x, &mut v);
                    let fw = w * f(x);
                    for i in 0..n {
                        out[i] += fw * v[i];
                    }
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        Ok(blocks.concat())
    }

    /// Largest deviation of the local mass matrix of `e` from the identity.
    pub fn mass_identity_error(&self, e: usize) -> Result<f64> {
        let n = self.n_loc();
        let rule = element_rule(&self.mesh, e, 2 * self.p + 2)?;
        let mut mass = vec![0.0; n * n];
        let mut v = vec![0.0; n];
        for (&x, w) in rule.points.iter().zip(&rule.weights) {
            self.bases[e].eval(x, &mut v);
            for i in 0..n {
                for j in 0..n {
                    mass[i * n + j] += w * v[i] * v[j];
                }
            }
        }
        Ok((0..n * n)
            .map(|k| (mass[k] - if k / n == k % n { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max))
    }
}
