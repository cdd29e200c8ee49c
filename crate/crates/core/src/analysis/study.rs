use crate::assembly::{assemble_load, manufactured_rhs};
use crate::error::{Error, Result};
use crate::hierarchy::{build_hierarchy, DEFAULT_TARGET_FACTOR};
use crate::mesh::generate_voronoi_lloyd;
use crate::solvers::{
    build_levels, cg_solve, pcg_block_jacobi, CycleKind, Multigrid, MultigridConfig, SolveReport, DEFAULT_LAMBDA_SAFETY,
    DEFAULT_MAX_ITER, DEFAULT_TOL_REL,
};
use crate::assembly::DEFAULT_C_SIGMA;
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

/// Seed of the random right-hand side used by the iteration studies.
pub const STUDY_RHS_SEED: u64 = 2017;

pub const ITERATION_CSV_HEADER: &str = "set,p,m,solver,levels,iterations,rho,converged";

/// A Voronoi mesh family member: `cells` Lloyd-relaxed cells from `seed`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshSet {
    pub name: String,
    pub cells: usize,
    pub lloyd_iters: usize,
    pub seed: u64,
}

impl MeshSet {
    pub fn voronoi(name: &str, cells: usize, seed: u64) -> Self {
        MeshSet {
            name: name.to_string(),
            cells,
            lloyd_iters: 20,
            seed,
        }
    }

    /// The four mesh sets of the standard study: 512, 1024, 2048 and 4096 cells.
    pub fn standard() -> Vec<Self> {
        [512, 1024, 2048, 4096]
            .iter()
            .enumerate()
            .map(|(k, &n)| MeshSet::voronoi(&format!("{}", k + 1), n, 1))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    TwoLevel,
    /// W-cycle on the given number of levels.
    WCycle(usize),
    Cg,
    Pcg,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::TwoLevel => "TL",
            SolverKind::WCycle(_) => "W",
            SolverKind::Cg => "CG",
            SolverKind::Pcg => "PCG",
        }
    }

    pub fn is_multigrid(self) -> bool {
        matches!(self, SolverKind::TwoLevel | SolverKind::WCycle(_))
    }

    fn levels(self) -> usize {
        match self {
            SolverKind::TwoLevel => 2,
            SolverKind::WCycle(l) => l,
            _ => 1,
        }
    }
}

/// Right-hand side used by the iteration studies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhsKind {
    /// Load vector of f = 2 pi^2 sin(pi x) sin(pi y).
    Manufactured,
    /// Uniform random entries in [-1, 1) from a fixed seed.
    Random(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub sets: Vec<MeshSet>,
    pub p_list: Vec<usize>,
    pub m_list: Vec<usize>,
    pub solvers: Vec<SolverKind>,
    pub c_sigma: f64,
    pub hierarchy_levels: usize,
    pub target_factor: f64,
    pub lambda_safety: f64,
    pub tol_rel: f64,
    pub max_iter: usize,
    pub rhs: RhsKind,
    pub output: Option<PathBuf>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            sets: MeshSet::standard(),
            p_list: vec![1],
            m_list: vec![3, 5, 8, 12, 16, 20],
            solvers: vec![
                SolverKind::TwoLevel,
                SolverKind::WCycle(3),
                SolverKind::WCycle(4),
                SolverKind::Cg,
                SolverKind::Pcg,
            ],
            c_sigma: DEFAULT_C_SIGMA,
            hierarchy_levels: 4,
            target_factor: DEFAULT_TARGET_FACTOR,
            lambda_safety: DEFAULT_LAMBDA_SAFETY,
            tol_rel: DEFAULT_TOL_REL,
            max_iter: DEFAULT_MAX_ITER,
            rhs: RhsKind::Random(STUDY_RHS_SEED),
            output: None,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sets.is_empty() || self.p_list.is_empty() || self.solvers.is_empty() {
            return Err(Error::InvalidArgument("study needs mesh sets, degrees and solvers".into()));
        }
        if self.m_list.is_empty() && self.solvers.iter().any(|s| s.is_multigrid()) {
            return Err(Error::InvalidArgument("multigrid solvers need a smoothing-step list".into()));
        }
        let need = self.solvers.iter().map(|s| s.levels()).max().unwrap_or(1);
        if need > self.hierarchy_levels {
            return Err(Error::InvalidArgument(format!(
                "a solver needs {need} levels but the hierarchy has {}",
                self.hierarchy_levels
            )));
        }
        if let Some(SolverKind::WCycle(l)) = self.solvers.iter().find(|s| matches!(s, SolverKind::WCycle(l) if *l < 2)) {
            return Err(Error::InvalidArgument(format!("W-cycle needs at least 2 levels, got {l}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRow {
    pub set: String,
    pub p: usize,
    /// `None` for the Krylov baselines, which have no smoothing parameter.
    pub m: Option<usize>,
    pub solver: String,
    pub levels: usize,
    pub iterations: usize,
    pub rho: f64,
    pub converged: bool,
}

impl IterationRow {
    fn from_report(set: &str, p: usize, m: Option<usize>, rep: &SolveReport) -> Self {
        IterationRow {
            set: set.to_string(),
            p,
            m,
            solver: rep.solver.clone(),
            levels: rep.levels,
            iterations: rep.iterations,
            rho: rep.rho,
            converged: rep.converged,
        }
    }

    fn failed(set: &str, p: usize, m: Option<usize>, solver: SolverKind) -> Self {
        IterationRow {
            set: set.to_string(),
            p,
            m,
            solver: solver.name().to_string(),
            levels: solver.levels(),
            iterations: 0,
            rho: f64::NAN,
            converged: false,
        }
    }
}

pub fn rows_to_csv(rows: &[IterationRow]) -> String {
    let mut s = format!("{ITERATION_CSV_HEADER}\n");
    for r in rows {
        let m = r.m.map_or(String::new(), |m| m.to_string());
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.set, r.p, m, r.solver, r.levels, r.iterations, r.rho, r.converged
        );
    }
    s
}

/// Runs every (set, p, m, solver) combination of `cfg`. Rows come back in
/// configuration order; a failing run yields a non-converged row.
pub fn iteration_table(cfg: &StudyConfig) -> Result<Vec<IterationRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for set in &cfg.sets {
        let mesh = Arc::new(generate_voronoi_lloyd(set.cells, set.lloyd_iters, set.seed)?);
        let geometry = build_hierarchy(mesh, cfg.hierarchy_levels, 1, cfg.target_factor, set.seed)?;
        for &p in &cfg.p_list {
            let h = geometry.with_degree(p);
            let levels = build_levels(&h, cfg.c_sigma, cfg.lambda_safety)?;
            let fine = levels.last().expect("non-empty");
            let space = fine.space.clone().expect("geometric level");
            let rhs = match cfg.rhs {
                RhsKind::Manufactured => assemble_load(&space, manufactured_rhs)?,
                RhsKind::Random(seed) => super::random_vector(space.dim(), seed),
            };
            let full = Multigrid::new(levels.clone())?;
            let mut jobs: Vec<(Option<usize>, SolverKind)> = Vec::new();
            for &m in &cfg.m_list {
                jobs.extend(cfg.solvers.iter().filter(|s| s.is_multigrid()).map(|&s| (Some(m), s)));
            }
            jobs.extend(cfg.solvers.iter().filter(|s| !s.is_multigrid()).map(|&s| (None, s)));
            let out: Vec<IterationRow> = jobs
                .par_iter()
                .map(|&(m, solver)| {
                    let run = || -> Result<SolveReport> {
                        match solver {
                            SolverKind::Cg => cg_solve(&fine.a, &rhs, cfg.tol_rel, cfg.max_iter),
                            SolverKind::Pcg => pcg_block_jacobi(&fine.a, &rhs, space.n_loc(), cfg.tol_rel, cfg.max_iter),
                            _ => {
                                let kind = if solver == SolverKind::TwoLevel {
                                    CycleKind::TwoLevel
                                } else {
                                    CycleKind::WCycle
                                };
                                let mg = full.top(solver.levels())?;
                                let mut mc = MultigridConfig::new(m.unwrap_or(0), kind);
                                mc.tol_rel = cfg.tol_rel;
                                mc.max_iter = cfg.max_iter;
                                mc.lambda_safety = cfg.lambda_safety;
                                mg.solve(&rhs, None, &mc)
                            }
                        }
                    };
                    match run() {
                        Ok(rep) => IterationRow::from_report(&set.name, p, m, &rep),
                        Err(e) => {
                            log::warn!("set {} p={p} {}: {e}", set.name, solver.name());
                            IterationRow::failed(&set.name, p, m, solver)
                        }
                    }
                })
                .collect();
            rows.extend(out);
        }
    }
    if let Some(path) = &cfg.output {
        crate::io_util::write_atomic(path, rows_to_csv(&rows).as_bytes())?;
    }
    Ok(rows)
}
