//! Quantitative studies: coercivity, spectral scaling, multigrid contraction,
//! discretisation error rates and iteration tables.

mod amg;
mod study;

pub use amg::{algebraic_levels, amg_failure_demo, AmgDemo, AMG_COARSE_LIMIT};
pub use study::{
    iteration_table, rows_to_csv, IterationRow, MeshSet, RhsKind, SolverKind, StudyConfig, ITERATION_CSV_HEADER, STUDY_RHS_SEED,
};

use crate::assembly::{
    assemble_load, assemble_sipg, manufactured_gradient, manufactured_rhs, manufactured_solution, penalty_sigma,
    PenaltyParams,
};
use crate::dgspace::{element_rule, face_rule, DGSpace};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm2};
use crate::mesh::generate_structured_triangular;
use crate::solvers::{estimate_lambda, CholeskyFactor, CycleKind, Multigrid, POWER_TOL};
use crate::sparse::SparseOperator;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

const ANALYSIS_SEED: u64 = 20_171_004;
const COERCIVITY_TOL: f64 = 1e-6;
const COERCIVITY_MAX_ITER: usize = 2000;
pub const CONTRACTION_ITERS: usize = 50;

/// Entries uniform in [-1, 1) from a ChaCha8 stream seeded with `seed`.
pub fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn random_unit(n: usize, seed: u64) -> Vec<f64> {
    let mut v = random_vector(n, seed);
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    v
}

/// Smallest eigenvalue of A v = lambda G v by inverse iteration with zero
/// shift, stopped on a relative Rayleigh-quotient change below 1e-6.
pub fn coercivity_constant(a: &SparseOperator, g: &SparseOperator) -> Result<f64> {
    if a.n_rows() != g.n_rows() || a.n_cols() != g.n_cols() {
        return Err(Error::DimensionMismatch("A and G differ in size".into()));
    }
    let chol = CholeskyFactor::new(a)?;
    let mut v = random_unit(a.n_rows(), ANALYSIS_SEED);
    let mut lambda = f64::INFINITY;
    for _ in 0..COERCIVITY_MAX_ITER {
        let x = chol.solve(&g.matvec(&v));
        let (ax, gx) = (a.matvec(&x), g.matvec(&x));
        let next = dot(&x, &ax) / dot(&x, &gx);
        let gnorm = dot(&x, &gx).sqrt();
        v = x.iter().map(|xi| xi / gnorm).collect();
        let done = (next - lambda).abs() <= COERCIVITY_TOL * next.abs();
        lambda = next;
        if done {
            return Ok(lambda);
        }
    }
    log::warn!("coercivity inverse iteration hit the iteration cap");
    Ok(lambda)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionEstimate {
    pub levels: usize,
    pub p: usize,
    pub m: usize,
    /// Estimated energy-norm norm of the error propagation operator.
    pub value: f64,
}

/// Energy-norm contraction of one multigrid cycle, estimated by power
/// iteration on the error propagation operator (one cycle with zero
/// right-hand side). Returns the largest ratio |||E e||| / |||e||| observed.
pub fn contraction_estimate(mg: &Multigrid, kind: CycleKind, m: usize, p: usize) -> ContractionEstimate {
    let a = &mg.fine().a;
    let n = a.n_rows();
    let zero = vec![0.0; n];
    let energy = |v: &[f64]| dot(v, &a.matvec(v)).max(0.0).sqrt();
    let mut e = random_unit(n, ANALYSIS_SEED + 1);
    let en = energy(&e);
    e.iter_mut().for_each(|x| *x /= en);
    let mut best: f64 = 0.0;
    for _ in 0..CONTRACTION_ITERS {
        mg.cycle(&zero, &mut e, kind, m, m);
        let ratio = energy(&e);
        best = best.max(ratio);
        if ratio == 0.0 || !ratio.is_finite() {
            break;
        }
        e.iter_mut().for_each(|x| *x /= ratio);
    }
    ContractionEstimate {
        levels: mg.n_levels(),
        p,
        m,
        value: best,
    }
}

/// Discretisation errors of the manufactured problem on one mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSample {
    pub p: usize,
    pub n: usize,
    pub h: f64,
    pub dg: f64,
    pub l2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub p: usize,
    pub dg_slope: f64,
    pub l2_slope: f64,
    pub samples: Vec<ErrorSample>,
}

/// Least-squares slope of log(y) against log(x).
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / k, ly.iter().sum::<f64>() / k);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Errors of the discrete solution `u` against sin(pi x) sin(pi y) in the L2
/// norm and the DG norm, using rules of exactness 2p+8.
pub fn manufactured_errors(space: &DGSpace, u: &[f64], c_sigma: f64) -> Result<(f64, f64)> {
    let mesh = space.mesh();
    let n = space.n_loc();
    let order = 2 * space.degree() + 8;
    let (mut l2, mut grad) = (0.0, 0.0);
    let (mut v, mut gx, mut gy) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for e in 0..mesh.n_elements() {
        let rule = element_rule(mesh, e, order)?;
        let c = &u[space.dof_offset(e)..space.dof_offset(e) + n];
        for (&x, w) in rule.points.iter().zip(&rule.weights) {
            space.basis(e).eval_grad(x, &mut v, &mut gx, &mut gy);
            let uh = dot(c, &v);
            let (dx, dy) = (dot(c, &gx), dot(c, &gy));
            let g = manufactured_gradient(x);
            l2 += w * (manufactured_solution(x) - uh).powi(2);
            grad += w * ((g.x - dx).powi(2) + (g.y - dy).powi(2));
        }
    }
    // the exact solution is continuous and vanishes on the boundary, so the
    // jump of the error is the jump of the discrete solution
    let params = PenaltyParams::new(c_sigma, space.degree())?;
    let mut jump = 0.0;
    for (f, face) in mesh.faces().iter().enumerate() {
        let sigma = penalty_sigma(face, &params, mesh);
        let rule = face_rule(mesh, f, order);
        for (&x, w) in rule.points.iter().zip(&rule.weights) {
            let plus = space.evaluate(u, face.plus, x);
            let minus = face.minus.map_or(0.0, |m| space.evaluate(u, m, x));
            jump += w * sigma * (plus - minus).powi(2);
        }
    }
    Ok((l2.sqrt(), (grad + jump).sqrt()))
}

/// Solves the manufactured problem on structured triangular meshes and fits
/// convergence slopes in h for every degree.
pub fn manufactured_convergence(p_list: &[usize], n_list: &[usize], c_sigma: f64) -> Result<Vec<RateRow>> {
    if p_list.is_empty() || n_list.len() < 2 {
        return Err(Error::InvalidArgument("need degrees and at least two mesh sizes".into()));
    }
    let mut rows = Vec::new();
    for &p in p_list {
        let mut samples = Vec::new();
        for &n in n_list {
            let mesh = Arc::new(generate_structured_triangular(n)?);
            let space = DGSpace::new(mesh.clone(), p)?;
            let a = assemble_sipg(&space, &PenaltyParams::new(c_sigma, p)?)?;
            let b = assemble_load(&space, manufactured_rhs)?;
            let u = CholeskyFactor::new(&a)?.solve(&b);
            let (l2, dg) = manufactured_errors(&space, &u, c_sigma)?;
            samples.push(ErrorSample {
                p,
                n,
                h: mesh.h(),
                dg,
                l2,
            });
        }
        let h: Vec<f64> = samples.iter().map(|s| s.h).collect();
        let dg: Vec<f64> = samples.iter().map(|s| s.dg).collect();
        let l2: Vec<f64> = samples.iter().map(|s| s.l2).collect();
        rows.push(RateRow {
            p,
            dg_slope: loglog_slope(&h, &dg),
            l2_slope: loglog_slope(&h, &l2),
            samples,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigSample {
    pub p: usize,
    pub n: usize,
    pub h: f64,
    pub lambda_max: f64,
}

/// Largest eigenvalue of the SIPG matrix (power iteration, no safety factor)
/// on structured triangular meshes for every (p, n) pair.
pub fn eig_scaling_study(p_list: &[usize], n_list: &[usize], c_sigma: f64) -> Result<Vec<EigSample>> {
    let mut out = Vec::new();
    for &p in p_list {
        for &n in n_list {
            let mesh = Arc::new(generate_structured_triangular(n)?);
            let space = DGSpace::new(mesh.clone(), p)?;
            let a = assemble_sipg(&space, &PenaltyParams::new(c_sigma, p)?)?;
            out.push(EigSample {
                p,
                n,
                h: mesh.h(),
                lambda_max: estimate_lambda(&a, 1.0, POWER_TOL),
            });
        }
    }
    Ok(out)
}

pub fn rates_to_csv(rows: &[RateRow]) -> String {
    let mut s = String::from("p,n,h,err_dg,err_l2,dg_slope,l2_slope\n");
    for r in rows {
        for e in &r.samples {
            s.push_str(&format!("{},{},{},{:e},{:e},{},{}\n", r.p, e.n, e.h, e.dg, e.l2, r.dg_slope, r.l2_slope));
        }
    }
    s
}

pub fn eig_to_csv(rows: &[EigSample]) -> String {
    let mut s = String::from("p,n,h,lambda_max\n");
    for r in rows {
        s.push_str(&format!("{},{},{},{}\n", r.p, r.n, r.h, r.lambda_max));
    }
    s
}
