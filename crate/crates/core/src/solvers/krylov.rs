use super::{SolveReport, DIVERGENCE_FACTOR};
use crate::error::{Error, Result};
use crate::linalg::{axpy, cholesky_in_place, cholesky_solve, dot, norm2};
use crate::sparse::SparseOperator;
use std::time::Instant;

fn pcg(
    name: &str,
    a: &SparseOperator,
    rhs: &[f64],
    tol_rel: f64,
    max_iter: usize,
    precond: impl Fn(&[f64], &mut [f64]),
) -> Result<SolveReport> {
    let n = a.n_rows();
    if rhs.len() != n {
        return Err(Error::DimensionMismatch("right-hand side does not match the matrix".into()));
    }
    let start = Instant::now();
    let mut rep = SolveReport::new(name, 1, 0, 0);
    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    let r0 = norm2(&r);
    rep.residual_history.push(r0);
    if r0 == 0.0 {
        rep.converged = true;
    } else {
        let mut z = vec![0.0; n];
        precond(&r, &mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut ap = vec![0.0; n];
        for it in 1..=max_iter {
            a.matvec_into(&p, &mut ap);
            let alpha = rz / dot(&p, &ap);
            axpy(alpha, &p, &mut x);
            axpy(-alpha, &ap, &mut r);
            let rn = norm2(&r);
            rep.residual_history.push(rn);
            rep.iterations = it;
            if rn <= tol_rel * r0 {
                rep.converged = true;
                break;
            }
            if !rn.is_finite() || rn > DIVERGENCE_FACTOR * r0 {
                rep.diverged = true;
                break;
            }
            precond(&r, &mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for (pi, zi) in p.iter_mut().zip(&z) {
                *pi = zi + beta * *pi;
            }
        }
    }
    rep.finish_rho();
    rep.solution = x;
    rep.wall_time_s = start.elapsed().as_secs_f64();
    Ok(rep)
}

/// Conjugate gradients from a zero start with a relative-residual stop.
pub fn cg_solve(a: &SparseOperator, rhs: &[f64], tol_rel: f64, max_iter: usize) -> Result<SolveReport> {
    pcg("CG", a, rhs, tol_rel, max_iter, |r, z| z.copy_from_slice(r))
}

/// CG preconditioned by the inverses of the `block`-sized diagonal blocks
/// (one per element for a DG matrix).
pub fn pcg_block_jacobi(a: &SparseOperator, rhs: &[f64], block: usize, tol_rel: f64, max_iter: usize) -> Result<SolveReport> {
    let n = a.n_rows();
    if block == 0 || !n.is_multiple_of(block) {
        return Err(Error::DimensionMismatch(format!("block size {block} does not divide {n}")));
    }
    let factors: Vec<Vec<f64>> = (0..n / block)
        .map(|e| {
            let off = e * block;
            let mut d = vec![0.0; block * block];
            for i in 0..block {
                let (cols, vals) = a.row(off + i);
                for (&c, &v) in cols.iter().zip(vals) {
                    if (off..off + block).contains(&c) {
                        d[i * block + c - off] = v;
                    }
                }
            }
            cholesky_in_place(&mut d, block)
                .map_err(|k| Error::Factorization(format!("diagonal block of element {e} is singular at mode {k}")))?;
            Ok(d)
        })
        .collect::<Result<_>>()?;
    pcg("PCG", a, rhs, tol_rel, max_iter, |r, z| {
        z.copy_from_slice(r);
        for (e, l) in factors.iter().enumerate() {
            cholesky_solve(l, block, &mut z[e * block..(e + 1) * block]);
        }
    })
}
