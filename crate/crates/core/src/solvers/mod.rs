//! Richardson-smoothed multigrid, Krylov baselines and a sparse direct solver.

mod direct;
mod krylov;
mod multigrid;
mod report;

pub use direct::{direct_solve, rcm_ordering, CholeskyFactor};
pub use krylov::{cg_solve, pcg_block_jacobi};
pub use multigrid::{build_levels, two_level_solve, w_cycle_solve, CycleKind, LevelData, Multigrid, MultigridConfig};
pub use report::SolveReport;

use crate::linalg::{dot, norm2};
use crate::sparse::SparseOperator;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_LAMBDA_SAFETY: f64 = 1.1;
pub const DEFAULT_TOL_REL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 5000;
/// A run is declared divergent once the residual grows by this factor.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

const POWER_SEED: u64 = 0x5eed_0f1a_3bda;
const POWER_MAX_ITER: usize = 200;
pub const POWER_TOL: f64 = 1e-4;

/// Upper spectral estimate `safety * lambda_max(A)` from power iteration with a
/// fixed random start, stopped when the Rayleigh quotient changes by less than
/// `tol` (relative) or after 200 steps.
pub fn estimate_lambda(a: &SparseOperator, safety: f64, tol: f64) -> f64 {
    let n = a.n_rows();
    if n == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(POWER_SEED);
    let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut y = vec![0.0; n];
    let mut rq = 0.0;
    for _ in 0..POWER_MAX_ITER {
        a.matvec_into(&x, &mut y);
        let next = dot(&x, &y);
        let ny = norm2(&y);
        if ny == 0.0 {
            log::warn!("power iteration hit the null space; spectral estimate is zero");
            return 0.0;
        }
        let done = (next - rq).abs() < tol * next.abs();
        rq = next;
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / ny;
        }
        if done {
            break;
        }
    }
    safety * rq
}

/// `m` Richardson sweeps z <- z + (rhs - A z) / lambda.
pub fn smooth(a: &SparseOperator, lambda: f64, z: &mut [f64], rhs: &[f64], m: usize, work: &mut [f64]) {
    let inv = 1.0 / lambda;
    for _ in 0..m {
        a.residual_into(rhs, z, work);
        for (zi, ri) in z.iter_mut().zip(work.iter()) {
            *zi += inv * ri;
        }
    }
}
