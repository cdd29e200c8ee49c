//! Symmetric interior penalty operator, load vector and DG-norm Gram matrix.

use crate::dgspace::{element_rule, face_rule, DGSpace};
use crate::error::{Error, Result};
use crate::mesh::{Face, Point2, PolyMesh};
use crate::sparse::SparseOperator;
use rayon::prelude::*;

pub const DEFAULT_C_SIGMA: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyParams {
    pub c_sigma: f64,
    pub p: usize,
}

impl PenaltyParams {
    pub fn new(c_sigma: f64, p: usize) -> Result<Self> {
        if !(c_sigma > 0.0) || !c_sigma.is_finite() {
            return Err(Error::InvalidArgument(format!("C_sigma must be positive, got {c_sigma}")));
        }
        Ok(PenaltyParams { c_sigma, p })
    }

    pub fn for_space(space: &DGSpace, c_sigma: f64) -> Result<Self> {
        Self::new(c_sigma, space.degree())
    }
}

/// sigma_F = C p^2 max(1/h+, 1/h-) on interior faces, C p^2 / h+ on the boundary.
pub fn penalty_sigma(face: &Face, params: &PenaltyParams, mesh: &PolyMesh) -> f64 {
    let p2 = (params.p * params.p) as f64;
    let inv_h = |e: usize| 1.0 / mesh.element(e).diameter;
    let m = match face.minus {
        Some(o) => inv_h(face.plus).max(inv_h(o)),
        None => inv_h(face.plus),
    };
    params.c_sigma * p2 * m
}

#[derive(Clone, Copy, PartialEq)]
enum Form {
    Sipg,
    DgNorm,
}

fn element_block(space: &DGSpace, e: usize) -> Result<Vec<f64>> {
    let n = space.n_loc();
    let rule = element_rule(space.mesh(), e, space.quad_order())?;
    let mut k = vec![0.0; n * n];
    let (mut v, mut gx, mut gy) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for (&x, w) in rule.points.iter().zip(&rule.weights) {
        space.basis(e).eval_grad(x, &mut v, &mut gx, &mut gy);
        for i in 0..n {
            let (wx, wy) = (w * gx[i], w * gy[i]);
            for j in 0..=i {
                k[i * n + j] += wx * gx[j] + wy * gy[j];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            k[j * n + i] = k[i * n + j];
        }
    }
    Ok(k)
}

/// Face contribution as a 2n x 2n block ordered (plus dofs, minus dofs); for
/// boundary faces only the leading n x n block is filled.
fn face_block(space: &DGSpace, f: usize, params: &PenaltyParams, form: Form) -> Vec<f64> {
    let mesh = space.mesh();
    let face = &mesh.faces()[f];
    let n = space.n_loc();
    let sides = if face.minus.is_some() { 2 } else { 1 };
    let nn = sides * n;
    let sigma = penalty_sigma(face, params, mesh);
    // average weight: 1/2 on interior faces, 1 on boundary faces
    let avg = if sides == 2 { 0.5 } else { 1.0 };
    let normal = Point2::new(face.normal[0], face.normal[1]);
    let rule = face_rule(mesh, f, space.quad_order());
    let mut block = vec![0.0; nn * nn];
    let (mut val, mut dn) = (vec![0.0; nn], vec![0.0; nn]);
    let (mut v, mut gx, mut gy) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let owners = [Some(face.plus), face.minus];
    for (&x, w) in rule.points.iter().zip(&rule.weights) {
        for (s, owner) in owners.iter().take(sides).enumerate() {
            let e = owner.expect("owner present");
            space.basis(e).eval_grad(x, &mut v, &mut gx, &mut gy);
            let sign = if s == 0 { 1.0 } else { -1.0 };
            for i in 0..n {
                // signed trace and normal derivative: [v] = val * n, {dv/dn} = dn
                val[s * n + i] = sign * v[i];
                dn[s * n + i] = avg * (gx[i] * normal.x + gy[i] * normal.y);
            }
        }
        for i in 0..nn {
            for j in 0..nn {
                let mut a = sigma * val[i] * val[j];
                if form == Form::Sipg {
                    a -= val[i] * dn[j] + dn[i] * val[j];
                }
                block[i * nn + j] += w * a;
            }
        }
    }
    block
}

fn assemble(space: &DGSpace, params: &PenaltyParams, form: Form) -> Result<SparseOperator> {
    if params.p != space.degree() {
        return Err(Error::DimensionMismatch(format!(
            "penalty degree {} does not match space degree {}",
            params.p,
            space.degree()
        )));
    }
    let mesh = space.mesh();
    let n = space.n_loc();
    let vol: Vec<Vec<f64>> = (0..mesh.n_elements())
        .into_par_iter()
        .map(|e| element_block(space, e))
        .collect::<Result<_>>()?;
    let faces: Vec<Vec<f64>> = (0..mesh.faces().len())
        .into_par_iter()
        .map(|f| face_block(space, f, params, form))
        .collect();

    // merge in canonical order: elements, then faces
    let mut trip = Vec::with_capacity(vol.len() * n * n + faces.len() * 4 * n * n);
    for (e, k) in vol.iter().enumerate() {
        let off = space.dof_offset(e);
        for i in 0..n {
            for j in 0..n {
                trip.push((off + i, off + j, k[i * n + j]));
            }
        }
    }
    for (f, block) in faces.iter().enumerate() {
        let face = &mesh.faces()[f];
        let owners: Vec<usize> = std::iter::once(face.plus).chain(face.minus).collect();
        let nn = owners.len() * n;
        for (si, &ei) in owners.iter().enumerate() {
            for (sj, &ej) in owners.iter().enumerate() {
                for i in 0..n {
                    for j in 0..n {
                        let v = block[(si * n + i) * nn + sj * n + j];
                        trip.push((space.dof_offset(ei) + i, space.dof_offset(ej) + j, v));
                    }
                }
            }
        }
    }
    SparseOperator::from_triplets(space.dim(), space.dim(), &trip).with_symmetry_checked()
}

/// Matrix of the SIPG bilinear form in the orthonormal basis.
pub fn assemble_sipg(space: &DGSpace, params: &PenaltyParams) -> Result<SparseOperator> {
    assemble(space, params, Form::Sipg)
}

/// Gram matrix of the DG norm: broken gradient plus penalised jumps.
pub fn dg_norm_gram(space: &DGSpace, params: &PenaltyParams) -> Result<SparseOperator> {
    assemble(space, params, Form::DgNorm)
}

/// b_i = int f phi_i with the default element rule.
pub fn assemble_load(space: &DGSpace, f: impl Fn(Point2) -> f64 + Sync) -> Result<Vec<f64>> {
    space.l2_project(f, space.quad_order())
}

pub fn assemble_load_with_order(space: &DGSpace, f: impl Fn(Point2) -> f64 + Sync, order: usize) -> Result<Vec<f64>> {
    space.l2_project(f, order)
}

/// Manufactured right-hand side 2 pi^2 sin(pi x) sin(pi y).
pub fn manufactured_rhs(x: Point2) -> f64 {
    use std::f64::consts::PI;
    2.0 * PI * PI * (PI * x.x).sin() * (PI * x.y).sin()
}

/// Exact solution sin(pi x) sin(pi y) paired with [`manufactured_rhs`].
pub fn manufactured_solution(x: Point2) -> f64 {
    use std::f64::consts::PI;
    (PI * x.x).sin() * (PI * x.y).sin()
}

pub fn manufactured_gradient(x: Point2) -> Point2 {
    use std::f64::consts::PI;
    let (sx, cx) = (PI * x.x).sin_cos();
    let (sy, cy) = (PI * x.y).sin_cos();
    Point2::new(PI * cx * sy, PI * sx * cy)
}
