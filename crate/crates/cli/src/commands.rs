use crate::args::{HierarchyArgs, MeshArgs, RhsChoice, SolveArgs, SolverChoice};
use crate::NotConverged;
use anyhow::{bail, Context, Result};
use polydg::analysis::{algebraic_levels, random_vector};
use polydg::assembly::{assemble_load, manufactured_rhs};
use polydg::hierarchy::{build_hierarchy, quality_report, DEFAULT_TARGET_FACTOR};
use polydg::mesh::{generate_structured_triangular, generate_voronoi_lloyd, load_mesh, save_mesh};
use polydg::solvers::{build_levels, cg_solve, pcg_block_jacobi, CycleKind, Multigrid, MultigridConfig, SolveReport};
use polydg::{write_atomic, DGSpace, MeshHierarchy, PenaltyParams, PolyMesh};
use std::path::Path;
use std::sync::Arc;

pub fn mesh(a: MeshArgs) -> Result<()> {
    let mesh = match (a.generator.tri, a.generator.voronoi) {
        (Some(n), _) => generate_structured_triangular(n as usize)?,
        (_, Some(n)) => generate_voronoi_lloyd(n as usize, a.lloyd, a.seed)?,
        _ => unreachable!("clap enforces one generator"),
    };
    save_mesh(&mesh, &a.output).with_context(|| format!("writing {}", a.output.display()))?;
    println!(
        "elements {} faces {} theta {:.4} -> {}",
        mesh.n_elements(),
        mesh.faces().len(),
        mesh.theta(),
        a.output.display()
    );
    Ok(())
}

pub fn hierarchy(a: HierarchyArgs) -> Result<()> {
    let fine = Arc::new(load_mesh(&a.input).with_context(|| format!("reading {}", a.input.display()))?);
    let h = build_hierarchy(fine, a.levels, 1, a.factor, a.seed)?;
    h.save(&a.output)?;
    let q = quality_report(&h);
    q.write_csv(a.output.join("quality.csv"))?;
    for l in &q.levels {
        println!(
            "level {} elements {:>6} theta {:.3} max faces {}",
            l.level, l.element_count, l.theta, l.max_faces
        );
    }
    if let Some(t) = q.theta_max {
        println!("Theta {t:.3}");
    }
    println!("wrote {}", a.output.display());
    Ok(())
}

fn load_hierarchy(a: &SolveArgs) -> Result<MeshHierarchy> {
    match (&a.hierarchy, &a.mesh) {
        (Some(dir), _) => Ok(MeshHierarchy::load(dir, a.p).with_context(|| format!("loading {}", dir.display()))?),
        (None, Some(file)) => {
            let levels = a.levels.unwrap_or(if a.solver == SolverChoice::Tl { 2 } else { 4 });
            let fine = Arc::new(load_mesh(file).with_context(|| format!("reading {}", file.display()))?);
            Ok(build_hierarchy(fine, levels, a.p, DEFAULT_TARGET_FACTOR, a.seed)?)
        }
        (None, None) => bail!(polydg::Error::InvalidArgument("give --hierarchy DIR or --mesh FILE".into())),
    }
}

fn load_fine(a: &SolveArgs) -> Result<Arc<PolyMesh>> {
    match (&a.hierarchy, &a.mesh) {
        (Some(dir), _) => Ok(MeshHierarchy::load(dir, a.p)?.finest().clone()),
        (None, Some(file)) => Ok(Arc::new(load_mesh(file).with_context(|| format!("reading {}", file.display()))?)),
        (None, None) => bail!(polydg::Error::InvalidArgument("give --hierarchy DIR or --mesh FILE".into())),
    }
}

fn rhs_for(space: &DGSpace, a: &SolveArgs) -> Result<Vec<f64>> {
    Ok(match a.rhs {
        RhsChoice::Manufactured => assemble_load(space, manufactured_rhs)?,
        RhsChoice::Random => random_vector(space.dim(), a.seed),
    })
}

fn dump_matrix(a: &polydg::SparseOperator, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    a.write_matrix_market(&mut buf, true)?;
    write_atomic(path, &buf)?;
    Ok(())
}

pub fn solve(a: SolveArgs) -> Result<()> {
    if a.p == 0 {
        bail!(polydg::Error::InvalidArgument("--p must be at least 1".into()));
    }
    let (m1, m2) = (a.m1.unwrap_or(a.m), a.m2.unwrap_or(a.m));
    let report: SolveReport = match a.solver {
        SolverChoice::Cg | SolverChoice::Pcg | SolverChoice::AmgMis => {
            let space = DGSpace::new(load_fine(&a)?, a.p)?;
            let op = polydg::assembly::assemble_sipg(&space, &PenaltyParams::new(a.c_sigma, a.p)?)?;
            if let Some(path) = &a.dump_matrix {
                dump_matrix(&op, path)?;
            }
            let rhs = rhs_for(&space, &a)?;
            match a.solver {
                SolverChoice::Cg => cg_solve(&op, &rhs, a.tol, a.max_iter)?,
                SolverChoice::Pcg => pcg_block_jacobi(&op, &rhs, space.n_loc(), a.tol, a.max_iter)?,
                _ => {
                    let levels = algebraic_levels(op, a.lambda_safety)?;
                    log::info!("algebraic hierarchy with {} levels", levels.len());
                    let mut cfg = MultigridConfig::new(0, CycleKind::WCycle);
                    (cfg.m1, cfg.m2, cfg.tol_rel, cfg.max_iter) = (m1, m2, a.tol, a.max_iter);
                    let mut rep = Multigrid::new(levels)?.solve(&rhs, None, &cfg)?;
                    rep.solver = "AMG-MIS".into();
                    rep
                }
            }
        }
        SolverChoice::Tl | SolverChoice::Wcycle => {
            let h = load_hierarchy(&a)?;
            let n = h.n_levels();
            let (k, kind) = if a.solver == SolverChoice::Tl {
                (2, CycleKind::TwoLevel)
            } else {
                (a.levels.unwrap_or(n), CycleKind::WCycle)
            };
            if k < 2 || k > n {
                bail!(polydg::Error::InvalidArgument(format!(
                    "{} needs between 2 and {n} levels, asked for {k}",
                    kind.name()
                )));
            }
            let h = h.top(k)?;
            let levels = build_levels(&h, a.c_sigma, a.lambda_safety)?;
            let fine = levels.last().expect("at least two levels");
            if let Some(path) = &a.dump_matrix {
                dump_matrix(&fine.a, path)?;
            }
            let rhs = rhs_for(fine.space.as_ref().expect("geometric level"), &a)?;
            let cfg = MultigridConfig {
                m1,
                m2,
                cycle: kind,
                lambda_safety: a.lambda_safety,
                tol_rel: a.tol,
                max_iter: a.max_iter,
            };
            Multigrid::new(levels)?.solve(&rhs, None, &cfg)?
        }
    };
    report.write_csv(&a.output)?;
    if let Some(path) = &a.history {
        report.write_history_csv(path)?;
    }
    println!(
        "{} levels {} N {} ({:.2}) converged {}",
        report.solver, report.levels, report.iterations, report.rho, report.converged
    );
    if !report.converged {
        return Err(NotConverged(format!("{} after {} iterations", report.solver, report.iterations)).into());
    }
    Ok(())
}
