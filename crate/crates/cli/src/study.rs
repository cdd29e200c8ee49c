use crate::args::{CommonStudy, RhsChoice, StudyArgs, StudyKind};
use anyhow::{bail, Result};
use polydg::analysis::{
    amg_failure_demo, coercivity_constant, contraction_estimate, eig_scaling_study, eig_to_csv, iteration_table,
    manufactured_convergence, rates_to_csv, rows_to_csv, MeshSet, RhsKind, SolverKind, StudyConfig, STUDY_RHS_SEED,
};
use polydg::assembly::{assemble_sipg, dg_norm_gram};
use polydg::hierarchy::{build_hierarchy, DEFAULT_TARGET_FACTOR};
use polydg::mesh::generate_voronoi_lloyd;
use polydg::solvers::{build_levels, CycleKind, Multigrid, DEFAULT_LAMBDA_SAFETY};
use polydg::{write_atomic, DGSpace, Error, PenaltyParams};
use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

fn non_empty<T>(name: &str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        bail!(Error::InvalidArgument(format!("--{name} needs at least one value")));
    }
    Ok(())
}

fn emit(common: &CommonStudy, default_name: &str, csv: &str) -> Result<()> {
    let path = common.output.clone().unwrap_or_else(|| PathBuf::from(default_name));
    write_atomic(&path, csv.as_bytes())?;
    print!("{csv}");
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn parse_solver(s: &str) -> Result<SolverKind> {
    let s = s.trim().to_ascii_lowercase();
    Ok(match s.as_str() {
        "tl" => SolverKind::TwoLevel,
        "cg" => SolverKind::Cg,
        "pcg" => SolverKind::Pcg,
        w if w.starts_with('w') => match w[1..].parse::<usize>() {
            Ok(l) if l >= 2 => SolverKind::WCycle(l),
            _ => bail!(Error::InvalidArgument(format!("bad W-cycle level count in '{s}'"))),
        },
        _ => bail!(Error::InvalidArgument(format!("unknown solver '{s}' (tl, w<J>, cg, pcg)"))),
    })
}

pub fn run(a: StudyArgs) -> Result<()> {
    match a.kind {
        StudyKind::Coercivity { sets, p, levels, common } => {
            non_empty("sets", &sets)?;
            non_empty("p", &p)?;
            let mut csv = String::from("set,cells,level,elements,p,c_coer\n");
            for (k, &cells) in sets.iter().enumerate() {
                let mesh = Arc::new(generate_voronoi_lloyd(cells, polydg::mesh::DEFAULT_LLOYD_ITERS, common.seed)?);
                let meshes = if levels > 1 {
                    build_hierarchy(mesh, levels, 1, DEFAULT_TARGET_FACTOR, common.seed)?.levels().to_vec()
                } else {
                    vec![mesh]
                };
                for &deg in &p {
                    // levels are printed fine first, numbered from the finest as G1
                    for (g, m) in meshes.iter().rev().enumerate() {
                        let space = DGSpace::new(m.clone(), deg)?;
                        let params = PenaltyParams::new(common.c_sigma, deg)?;
                        let c = coercivity_constant(&assemble_sipg(&space, &params)?, &dg_norm_gram(&space, &params)?)?;
                        let _ = writeln!(csv, "{},{cells},G{},{},{deg},{c}", k + 1, g + 1, m.n_elements());
                    }
                }
            }
            emit(&common, "coercivity.csv", &csv)
        }
        StudyKind::Iterations { sets, p, m, solvers, rhs, max_iter, common } => {
            non_empty("sets", &sets)?;
            let solvers = solvers.iter().map(|s| parse_solver(s)).collect::<Result<Vec<_>>>()?;
            let hierarchy_levels = solvers
                .iter()
                .map(|s| match s {
                    SolverKind::TwoLevel => 2,
                    SolverKind::WCycle(l) => *l,
                    _ => 2,
                })
                .max()
                .unwrap_or(2);
            let cfg = StudyConfig {
                sets: sets
                    .iter()
                    .enumerate()
                    .map(|(k, &n)| MeshSet::voronoi(&(k + 1).to_string(), n, common.seed))
                    .collect(),
                p_list: p,
                m_list: m,
                solvers,
                c_sigma: common.c_sigma,
                hierarchy_levels,
                max_iter,
                rhs: match rhs {
                    RhsChoice::Manufactured => RhsKind::Manufactured,
                    RhsChoice::Random => RhsKind::Random(STUDY_RHS_SEED),
                },
                ..StudyConfig::default()
            };
            let rows = iteration_table(&cfg)?;
            emit(&common, "iterations.csv", &rows_to_csv(&rows))
        }
        StudyKind::Contraction { cells, p, m, levels, common } => {
            non_empty("p", &p)?;
            non_empty("levels", &levels)?;
            let fixed_m = if m == "2p2" {
                None
            } else {
                Some(m.parse::<usize>().map_err(|_| Error::InvalidArgument(format!("--m must be 2p2 or an integer, got '{m}'")))?)
            };
            let max_levels = *levels.iter().max().expect("non-empty");
            if levels.iter().any(|&l| l < 2) {
                bail!(Error::InvalidArgument("--levels entries must be at least 2".into()));
            }
            let mesh = Arc::new(generate_voronoi_lloyd(cells, polydg::mesh::DEFAULT_LLOYD_ITERS, common.seed)?);
            let geometry = build_hierarchy(mesh, max_levels, 1, DEFAULT_TARGET_FACTOR, common.seed)?;
            let mut csv = String::from("p,m,cycle,levels,contraction\n");
            for &deg in &p {
                let mg = Multigrid::new(build_levels(&geometry.with_degree(deg), common.c_sigma, DEFAULT_LAMBDA_SAFETY)?)?;
                let steps = fixed_m.unwrap_or(2 * deg * deg);
                for &l in &levels {
                    let kind = if l == 2 { CycleKind::TwoLevel } else { CycleKind::WCycle };
                    let c = contraction_estimate(&mg.top(l)?, kind, steps, deg);
                    let _ = writeln!(csv, "{deg},{steps},{},{l},{}", kind.name(), c.value);
                }
            }
            emit(&common, "contraction.csv", &csv)
        }
        StudyKind::Rates { p, n, common } => {
            let rows = manufactured_convergence(&p, &n, common.c_sigma)?;
            emit(&common, "rates.csv", &rates_to_csv(&rows))
        }
        StudyKind::Eigscaling { p, n, common } => {
            non_empty("p", &p)?;
            non_empty("n", &n)?;
            let rows = eig_scaling_study(&p, &n, common.c_sigma)?;
            emit(&common, "eigscaling.csv", &eig_to_csv(&rows))
        }
        StudyKind::Amg { cells, p, m, max_iter, common } => {
            non_empty("p", &p)?;
            let mesh = Arc::new(generate_voronoi_lloyd(cells, polydg::mesh::DEFAULT_LLOYD_ITERS, common.seed)?);
            let mut csv = String::from("p,levels,dims,iterations,rho,converged\n");
            for &deg in &p {
                let d = amg_failure_demo(mesh.clone(), deg, common.c_sigma, m, max_iter)?;
                let dims = d.dims.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
                let r = &d.report;
                let _ = writeln!(csv, "{deg},{},{dims},{},{},{}", d.n_levels(), r.iterations, r.rho, r.converged);
            }
            emit(&common, "amg.csv", &csv)
        }
    }
}
