use super::{estimate_lambda, smooth, CholeskyFactor, SolveReport};
use super::{DEFAULT_LAMBDA_SAFETY, DEFAULT_MAX_ITER, DEFAULT_TOL_REL, DIVERGENCE_FACTOR, POWER_TOL};
use crate::assembly::{assemble_sipg, PenaltyParams};
use crate::dgspace::DGSpace;
use crate::error::{Error, Result};
use crate::hierarchy::MeshHierarchy;
use crate::linalg::norm2;
use crate::sparse::SparseOperator;
use crate::transfer::{prolongation_matrix, TransferPair};
use std::sync::Arc;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleKind {
    TwoLevel,
    WCycle,
}

impl CycleKind {
    pub fn name(self) -> &'static str {
        match self {
            CycleKind::TwoLevel => "TL",
            CycleKind::WCycle => "W",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultigridConfig {
    pub m1: usize,
    pub m2: usize,
    pub cycle: CycleKind,
    pub lambda_safety: f64,
    pub tol_rel: f64,
    pub max_iter: usize,
}

impl MultigridConfig {
    /// Symmetric smoothing m1 = m2 = m with default tolerances.
    pub fn new(m: usize, cycle: CycleKind) -> Self {
        MultigridConfig {
            m1: m,
            m2: m,
            cycle,
            lambda_safety: DEFAULT_LAMBDA_SAFETY,
            tol_rel: DEFAULT_TOL_REL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol_rel > 0.0) {
            return Err(Error::InvalidArgument(format!("tol_rel must be positive, got {}", self.tol_rel)));
        }
        if !(self.lambda_safety >= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "lambda safety must be at least 1, got {}",
                self.lambda_safety
            )));
        }
        Ok(())
    }
}

/// Per-level operator, smoother scale and transfer to the next coarser level.
#[derive(Debug, Clone)]
pub struct LevelData {
    pub space: Option<Arc<DGSpace>>,
    pub a: Arc<SparseOperator>,
    pub lambda: f64,
    pub to_coarser: Option<TransferPair>,
}

impl LevelData {
    pub fn new(a: SparseOperator, lambda_safety: f64, to_coarser: Option<TransferPair>) -> Self {
        let lambda = estimate_lambda(&a, lambda_safety, POWER_TOL);
        LevelData {
            space: None,
            a: Arc::new(a),
            lambda,
            to_coarser,
        }
    }
}

/// Discretises every level of a hierarchy with the SIPG operator and links
/// consecutive levels by the nested-space embedding.
pub fn build_levels(h: &MeshHierarchy, c_sigma: f64, lambda_safety: f64) -> Result<Vec<Arc<LevelData>>> {
    let mut spaces: Vec<Arc<DGSpace>> = Vec::with_capacity(h.n_levels());
    for (k, mesh) in h.levels().iter().enumerate() {
        let p = h.p_per_level()[k];
        let reuse = spaces
            .last()
            .filter(|s| Arc::ptr_eq(s.mesh_arc(), mesh) && s.degree() == p)
            .cloned();
        spaces.push(match reuse {
            Some(s) => s,
            None => Arc::new(DGSpace::new(mesh.clone(), p)?),
        });
    }
    let mut out = Vec::with_capacity(spaces.len());
    for (k, space) in spaces.iter().enumerate() {
        let a = assemble_sipg(space, &PenaltyParams::new(c_sigma, space.degree())?)?;
        let to_coarser = if k > 0 {
            Some(prolongation_matrix(space, &spaces[k - 1], &h.maps()[k - 1])?)
        } else {
            None
        };
        let mut level = LevelData::new(a, lambda_safety, to_coarser);
        level.space = Some(space.clone());
        out.push(Arc::new(level));
    }
    Ok(out)
}

/// Multigrid operator hierarchy, coarse (index 0) to fine, with the coarsest
/// level solved by sparse Cholesky.
#[derive(Debug, Clone)]
pub struct Multigrid {
    levels: Vec<Arc<LevelData>>,
    coarse: Arc<CholeskyFactor>,
}

impl Multigrid {
    pub fn new(levels: Vec<Arc<LevelData>>) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::InvalidArgument("multigrid needs at least two levels".into()));
        }
        for (k, l) in levels.iter().enumerate().skip(1) {
            let t = l
                .to_coarser
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument(format!("level {k} has no transfer")))?;
            if t.fine_dim() != l.a.n_rows() || t.coarse_dim() != levels[k - 1].a.n_rows() {
                return Err(Error::DimensionMismatch(format!("transfer into level {k} has wrong shape")));
            }
        }
        let coarse = Arc::new(CholeskyFactor::new(&levels[0].a)?);
        Ok(Multigrid { levels, coarse })
    }

    /// The `k` finest levels, re-factorising the new coarsest operator.
    pub fn top(&self, k: usize) -> Result<Self> {
        let n = self.levels.len();
        if k == n {
            return Ok(self.clone());
        }
        if k < 2 || k > n {
            return Err(Error::InvalidArgument(format!("cannot take {k} of {n} levels")));
        }
        Self::new(self.levels[n - k..].to_vec())
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, k: usize) -> &LevelData {
        &self.levels[k]
    }

    pub fn fine(&self) -> &LevelData {
        self.levels.last().expect("non-empty")
    }

    pub fn coarse_solve(&self, g: &[f64]) -> Vec<f64> {
        self.coarse.solve(g)
    }

    /// One cycle on the finest level, updating `z` in place.
    pub fn cycle(&self, rhs: &[f64], z: &mut [f64], kind: CycleKind, m1: usize, m2: usize) {
        self.cycle_at(self.levels.len() - 1, rhs, z, kind, m1, m2);
    }

    fn cycle_at(&self, j: usize, g: &[f64], z: &mut [f64], kind: CycleKind, m1: usize, m2: usize) {
        if j == 0 {
            z.copy_from_slice(&self.coarse.solve(g));
            return;
        }
        let level = &self.levels[j];
        let t = level.to_coarser.as_ref().expect("checked in new");
        let mut work = vec![0.0; g.len()];
        smooth(&level.a, level.lambda, z, g, m1, &mut work);
        level.a.residual_into(g, z, &mut work);
        let rc = t.restrict(&work);
        let mut ec = vec![0.0; rc.len()];
        // the base case ignores its initial guess, so one visit suffices there
        let visits = if kind == CycleKind::WCycle && j > 1 { 2 } else { 1 };
        for _ in 0..visits {
            self.cycle_at(j - 1, &rc, &mut ec, kind, m1, m2);
        }
        let corr = t.prolong(&ec);
        for (zi, ci) in z.iter_mut().zip(&corr) {
            *zi += ci;
        }
        smooth(&level.a, level.lambda, z, g, m2, &mut work);
    }

    /// Iterates cycles from `z0` (zero when absent) until the relative
    /// residual drops below `tol_rel`.
    pub fn solve(&self, rhs: &[f64], z0: Option<&[f64]>, cfg: &MultigridConfig) -> Result<SolveReport> {
        cfg.validate()?;
        let a = &self.fine().a;
        let n = a.n_rows();
        if rhs.len() != n || z0.is_some_and(|z| z.len() != n) {
            return Err(Error::DimensionMismatch("right-hand side does not match the fine level".into()));
        }
        if cfg.cycle == CycleKind::TwoLevel && self.n_levels() != 2 {
            return Err(Error::InvalidArgument(format!(
                "two-level cycle needs exactly 2 levels, have {}",
                self.n_levels()
            )));
        }
        let start = Instant::now();
        let mut rep = SolveReport::new(cfg.cycle.name(), self.n_levels(), cfg.m1, cfg.m2);
        let mut z = z0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
        let mut r = vec![0.0; n];
        a.residual_into(rhs, &z, &mut r);
        let r0 = norm2(&r);
        rep.residual_history.push(r0);
        if r0 == 0.0 {
            rep.converged = true;
        } else {
            for it in 1..=cfg.max_iter {
                self.cycle(rhs, &mut z, cfg.cycle, cfg.m1, cfg.m2);
                a.residual_into(rhs, &z, &mut r);
                let rn = norm2(&r);
                rep.residual_history.push(rn);
                rep.iterations = it;
                if rn <= cfg.tol_rel * r0 {
                    rep.converged = true;
                    break;
                }
                if !rn.is_finite() || rn > DIVERGENCE_FACTOR * r0 {
                    rep.diverged = true;
                    break;
                }
            }
        }
        rep.finish_rho();
        rep.solution = z;
        rep.wall_time_s = start.elapsed().as_secs_f64();
        Ok(rep)
    }
}

pub fn two_level_solve(mg: &Multigrid, rhs: &[f64], z0: Option<&[f64]>, cfg: &MultigridConfig) -> Result<SolveReport> {
    let cfg = MultigridConfig {
        cycle: CycleKind::TwoLevel,
        ..cfg.clone()
    };
    mg.solve(rhs, z0, &cfg)
}

pub fn w_cycle_solve(mg: &Multigrid, rhs: &[f64], z0: Option<&[f64]>, cfg: &MultigridConfig) -> Result<SolveReport> {
    let cfg = MultigridConfig {
        cycle: CycleKind::WCycle,
        ..cfg.clone()
    };
    mg.solve(rhs, z0, &cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_load, manufactured_rhs};
    use crate::hierarchy::build_hierarchy;
    use crate::mesh::generate_structured_triangular;

    fn structured(n: usize, levels: usize) -> Multigrid {
        let mesh = Arc::new(generate_structured_triangular(n).unwrap());
        let h = build_hierarchy(mesh, levels, 1, 4.0, 3).unwrap();
        Multigrid::new(build_levels(&h, 10.0, 1.1).unwrap()).unwrap()
    }

    fn rhs(mg: &Multigrid) -> Vec<f64> {
        assemble_load(mg.fine().space.as_ref().unwrap(), manufactured_rhs).unwrap()
    }

    #[test]
    fn exact_coarse_space_solves_in_one_cycle() {
        let mesh = Arc::new(generate_structured_triangular(4).unwrap());
        let mg = Multigrid::new(build_levels(&MeshHierarchy::identity_pair(mesh, 2), 10.0, 1.1).unwrap()).unwrap();
        let mut cfg = MultigridConfig::new(0, CycleKind::TwoLevel);
        cfg.tol_rel = 1e-10;
        let rep = mg.solve(&rhs(&mg), None, &cfg).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 1);
    }

    #[test]
    fn w_cycle_with_two_levels_is_the_two_level_method() {
        let mg = structured(8, 2);
        let b = rhs(&mg);
        let cfg = MultigridConfig::new(3, CycleKind::TwoLevel);
        let tl = two_level_solve(&mg, &b, None, &cfg).unwrap();
        let w = w_cycle_solve(&mg, &b, None, &cfg).unwrap();
        assert_eq!(tl.residual_history, w.residual_history);
        assert_eq!(tl.solution, w.solution);
    }

    #[test]
    fn w_cycle_converges_on_structured_mesh() {
        let mg = structured(16, 3);
        let rep = w_cycle_solve(&mg, &rhs(&mg), None, &MultigridConfig::new(4, CycleKind::WCycle)).unwrap();
        assert!(rep.converged && !rep.diverged);
        assert!(rep.iterations < 100, "{}", rep.iterations);
    }

    #[test]
    fn top_keeps_the_finest_levels() {
        let mg = structured(16, 3);
        let two = mg.top(2).unwrap();
        assert_eq!(two.n_levels(), 2);
        assert!(Arc::ptr_eq(&two.fine().a, &mg.fine().a));
        assert!(mg.top(1).is_err() && mg.top(4).is_err());
    }

    #[test]
    fn two_level_cycle_rejects_deeper_hierarchies() {
        let mg = structured(16, 3);
        assert!(mg.solve(&rhs(&mg), None, &MultigridConfig::new(2, CycleKind::TwoLevel)).is_err());
    }

    #[test]
    fn mismatched_right_hand_side_is_rejected() {
        let mg = structured(8, 2);
        let cfg = MultigridConfig::new(2, CycleKind::WCycle);
        assert!(matches!(mg.solve(&[1.0; 3], None, &cfg), Err(Error::DimensionMismatch(_))));
    }
}
