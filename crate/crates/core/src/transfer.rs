//! Prolongation and restriction between nested DG spaces.

use crate::dgspace::{element_rule, DGSpace};
use crate::error::{Error, Result};
use crate::hierarchy::Agglomeration;
use crate::sparse::SparseOperator;
use rayon::prelude::*;

/// Relative tolerance for the child-area nesting check.
const NESTING_TOL: f64 = 1e-10;

/// Embedding V_coarse -> V_fine and its L2-adjoint. With orthonormal bases
/// the adjoint is the plain transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferPair {
    pub prolongation: SparseOperator,
    pub restriction: SparseOperator,
}

impl TransferPair {
    pub fn from_prolongation(p: SparseOperator) -> Self {
        let restriction = p.transpose();
        TransferPair {
            prolongation: p,
            restriction,
        }
    }

    pub fn fine_dim(&self) -> usize {
        self.prolongation.n_rows()
    }

    pub fn coarse_dim(&self) -> usize {
        self.prolongation.n_cols()
    }

    pub fn prolong(&self, v: &[f64]) -> Vec<f64> {
        self.prolongation.matvec(v)
    }

    pub fn restrict(&self, v: &[f64]) -> Vec<f64> {
        self.restriction.matvec(v)
    }
}

/// P[(f, i), (c, j)] = int_f phi_{f,i} phi_{c,j} over each fine element f
/// with c its parent, using the fine element's volume rule.
pub fn prolongation_matrix(fine: &DGSpace, coarse: &DGSpace, map: &Agglomeration) -> Result<TransferPair> {
    let fm = fine.mesh();
    let cm = coarse.mesh();
    if map.fine_to_coarse.len() != fm.n_elements() || map.coarse_count != cm.n_elements() {
        return Err(Error::DimensionMismatch("agglomeration does not link these spaces".into()));
    }
    if coarse.degree() > fine.degree() {
        return Err(Error::Hierarchy(format!(
            "coarse degree {} exceeds fine degree {}",
            coarse.degree(),
            fine.degree()
        )));
    }
    let mut child_area = vec![0.0; cm.n_elements()];
    for (f, &c) in map.fine_to_coarse.iter().enumerate() {
        child_area[c] += fm.element(f).area;
    }
    for (c, a) in child_area.iter().enumerate() {
        let area = cm.element(c).area;
        if (a - area).abs() > NESTING_TOL * area {
            return Err(Error::Hierarchy(format!(
                "coarse element {c} is not the union of its children (area {area} vs {a})"
            )));
        }
    }

    let (nf, nc) = (fine.n_loc(), coarse.n_loc());
    let order = 2 * fine.degree() + 2;
    let blocks: Vec<Vec<f64>> = (0..fm.n_elements())
        .into_par_iter()
        .map(|f| {
            let c = map.fine_to_coarse[f];
            let rule = element_rule(fm, f, order)?;
            let (mut vf, mut vc) = (vec![0.0; nf], vec![0.0; nc]);
            let mut block = vec![0.0; nf * nc];
            for (&x, w) in rule.points.iter().zip(&rule.weights) {
                fine.basis(f).eval(x, &mut vf);
                coarse.basis(c).eval(x, &mut vc);
                for i in 0..nf {
                    for j in 0..nc {
                        block[i * nc + j] += w * vf[i] * vc[j];
                    }
                }
            }
            Ok(block)
        })
        .collect::<Result<_>>()?;
    let mut trip = Vec::with_capacity(blocks.len() * nf * nc);
    for (f, block) in blocks.iter().enumerate() {
        let (rf, rc) = (fine.dof_offset(f), coarse.dof_offset(map.fine_to_coarse[f]));
        for i in 0..nf {
            for j in 0..nc {
                trip.push((rf + i, rc + j, block[i * nc + j]));
            }
        }
    }
    Ok(TransferPair::from_prolongation(SparseOperator::from_triplets(
        fine.dim(),
        coarse.dim(),
        &trip,
    )))
}

/// Degree embedding on a single mesh.
pub fn p_embedding(low: &DGSpace, high: &DGSpace) -> Result<TransferPair> {
    let same = std::sync::Arc::ptr_eq(low.mesh_arc(), high.mesh_arc())
        || (low.mesh().vertices() == high.mesh().vertices() && low.mesh().elements() == high.mesh().elements());
    if !same {
        return Err(Error::DimensionMismatch("p-embedding requires a shared mesh".into()));
    }
    if low.degree() > high.degree() {
        return Err(Error::InvalidArgument(format!(
            "low degree {} exceeds high degree {}",
            low.degree(),
            high.degree()
        )));
    }
    prolongation_matrix(high, low, &Agglomeration::identity(low.mesh().n_elements()))
}
