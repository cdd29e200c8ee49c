use crate::assembly::{assemble_load, assemble_sipg, manufactured_rhs, PenaltyParams};
use crate::dgspace::DGSpace;
use crate::error::Result;
use crate::hierarchy::aggregate_algebraic_mis;
use crate::mesh::PolyMesh;
use crate::solvers::{CycleKind, LevelData, Multigrid, MultigridConfig, SolveReport, DEFAULT_LAMBDA_SAFETY};
use crate::sparse::SparseOperator;
use crate::transfer::TransferPair;
use std::sync::Arc;

/// Coarsening stops once a level has at most this many unknowns.
pub const AMG_COARSE_LIMIT: usize = 200;
const AMG_MAX_LEVELS: usize = 12;

#[derive(Debug, Clone)]
pub struct AmgDemo {
    /// Unknowns per level, fine to coarse.
    pub dims: Vec<usize>,
    pub report: SolveReport,
}

impl AmgDemo {
    pub fn n_levels(&self) -> usize {
        self.dims.len()
    }
}

/// Unsmoothed-aggregation hierarchy: MIS aggregates, piecewise-constant
/// prolongation and Galerkin coarse operators, coarse to fine.
pub fn algebraic_levels(a: SparseOperator, lambda_safety: f64) -> Result<Vec<Arc<LevelData>>> {
    let mut ops = vec![a];
    let mut transfers: Vec<TransferPair> = Vec::new();
    while ops.last().expect("non-empty").n_rows() > AMG_COARSE_LIMIT && ops.len() < AMG_MAX_LEVELS {
        let fine = ops.last().expect("non-empty");
        let agg = aggregate_algebraic_mis(fine)?;
        if agg.coarse_count >= fine.n_rows() {
            break;
        }
        let trip: Vec<_> = agg.fine_to_coarse.iter().enumerate().map(|(i, &c)| (i, c, 1.0)).collect();
        let p = SparseOperator::from_triplets(fine.n_rows(), agg.coarse_count, &trip);
        let coarse = fine.galerkin(&p);
        transfers.push(TransferPair::from_prolongation(p));
        ops.push(coarse);
    }
    let mut transfers = transfers.into_iter().map(Some).collect::<Vec<_>>();
    transfers.push(None);
    // ops[k] is coarsened by transfers[k]; the multigrid wants coarse first
    let mut levels: Vec<Arc<LevelData>> = ops
        .into_iter()
        .zip(transfers)
        .map(|(a, t)| Arc::new(LevelData::new(a, lambda_safety, t)))
        .collect();
    levels.reverse();
    Ok(levels)
}

/// W-cycle with `m` smoothing steps on the algebraic hierarchy of the SIPG
/// matrix, applied to the manufactured load.
pub fn amg_failure_demo(mesh: Arc<PolyMesh>, p: usize, c_sigma: f64, m: usize, max_iter: usize) -> Result<AmgDemo> {
    let space = DGSpace::new(mesh, p)?;
    let a = assemble_sipg(&space, &PenaltyParams::new(c_sigma, p)?)?;
    let rhs = assemble_load(&space, manufactured_rhs)?;
    let levels = algebraic_levels(a, DEFAULT_LAMBDA_SAFETY)?;
    let dims: Vec<usize> = levels.iter().rev().map(|l| l.a.n_rows()).collect();
    let mut cfg = MultigridConfig::new(m, CycleKind::WCycle);
    cfg.max_iter = max_iter;
    let report = if levels.len() < 2 {
        crate::solvers::cg_solve(&levels[0].a, &rhs, cfg.tol_rel, max_iter)?
    } else {
        Multigrid::new(levels)?.solve(&rhs, None, &cfg)?
    };
    Ok(AmgDemo { dims, report })
}
