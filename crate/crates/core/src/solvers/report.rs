use crate::error::Result;
use std::fmt::Write as _;
use std::path::Path;

/// Outcome of an iterative solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solver: String,
    pub levels: usize,
    pub m1: usize,
    pub m2: usize,
    pub iterations: usize,
    /// Euclidean residual norms, starting with the initial residual.
    pub residual_history: Vec<f64>,
    /// Geometric-mean residual reduction per iteration.
    pub rho: f64,
    pub converged: bool,
    pub diverged: bool,
    pub wall_time_s: f64,
    pub solution: Vec<f64>,
}

impl SolveReport {
    pub(crate) fn new(solver: &str, levels: usize, m1: usize, m2: usize) -> Self {
        SolveReport {
            solver: solver.to_string(),
            levels,
            m1,
            m2,
            iterations: 0,
            residual_history: Vec::new(),
            rho: 0.0,
            converged: false,
            diverged: false,
            wall_time_s: 0.0,
            solution: Vec::new(),
        }
    }

    /// rho = exp(ln(|r_N| / |r_0|) / N); zero when no iteration was needed.
    pub(crate) fn finish_rho(&mut self) {
        let n = self.iterations;
        let (r0, rn) = (self.residual_history[0], *self.residual_history.last().expect("history"));
        self.rho = if n == 0 || r0 == 0.0 || rn == 0.0 {
            0.0
        } else {
            ((rn / r0).ln() / n as f64).exp()
        };
    }

    pub fn initial_residual(&self) -> f64 {
        self.residual_history[0]
    }

    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().expect("history")
    }

    /// Wall time is left out so that repeated runs give identical files.
    pub const CSV_HEADER: &'static str = "solver,levels,m1,m2,iterations,rho,converged,diverged";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.solver,
            self.levels,
            self.m1,
            self.m2,
            self.iterations,
            self.rho,
            self.converged,
            self.diverged
        )
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = format!("{}\n{}\n", Self::CSV_HEADER, self.csv_row());
        crate::io_util::write_atomic(path.as_ref(), text.as_bytes())
    }

    pub fn write_history_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut s = String::from("iteration,residual\n");
        for (k, r) in self.residual_history.iter().enumerate() {
            let _ = writeln!(s, "{k},{r:e}");
        }
        crate::io_util::write_atomic(path.as_ref(), s.as_bytes())
    }
}
