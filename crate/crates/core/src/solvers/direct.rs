use crate::error::{Error, Result};
use crate::sparse::SparseOperator;
use std::collections::VecDeque;

/// Reverse Cuthill–McKee ordering of the matrix graph: `perm[new] = old`.
pub fn rcm_ordering(a: &SparseOperator) -> Vec<usize> {
    let n = a.n_rows();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).0.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let bfs = |start: usize, visited: &mut Vec<bool>, out: &mut Vec<usize>| {
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        let mut nbrs = Vec::new();
        while let Some(u) = queue.pop_front() {
            out.push(u);
            nbrs.clear();
            nbrs.extend(a.row(u).0.iter().copied().filter(|&v| !visited[v]));
            nbrs.sort_by_key(|&v| (degree[v], v));
            for &v in &nbrs {
                visited[v] = true;
                queue.push_back(v);
            }
        }
    };
    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        // pseudo-peripheral start: hop to the farthest vertex while the
        // eccentricity grows
        let (mut start, (mut far, mut depth)) = (seed, bfs_far(a, seed, &visited));
        for _ in 0..4 {
            let (f2, d2) = bfs_far(a, far, &visited);
            if d2 <= depth {
                break;
            }
            (start, far, depth) = (far, f2, d2);
        }
        bfs(start, &mut visited, &mut order);
    }
    order.reverse();
    order
}

/// Last vertex reached by a breadth-first search and its distance.
fn bfs_far(a: &SparseOperator, start: usize, blocked: &[bool]) -> (usize, usize) {
    let mut dist = vec![usize::MAX; a.n_rows()];
    dist[start] = 0;
    let mut queue = VecDeque::from([start]);
    let mut last = (start, 0);
    while let Some(u) = queue.pop_front() {
        last = (u, dist[u]);
        for &v in a.row(u).0 {
            if dist[v] == usize::MAX && !blocked[v] {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    last
}

/// Envelope (profile) Cholesky factor of a symmetric positive definite
/// sparse matrix under a reverse Cuthill–McKee permutation.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl CholeskyFactor {
    pub fn new(a: &SparseOperator) -> Result<Self> {
        let n = a.n_rows();
        if a.n_cols() != n {
            return Err(Error::DimensionMismatch("factorisation needs a square matrix".into()));
        }
        let perm = rcm_ordering(a);
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (i, fi) in first.iter_mut().enumerate() {
            for &c in a.row(perm[i]).0 {
                *fi = (*fi).min(inv[c]);
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + i - first[i] + 1);
        }
        let mut data = vec![0.0; start[n]];
        for i in 0..n {
            let (cols, vals) = a.row(perm[i]);
            for (&c, &v) in cols.iter().zip(vals) {
                let j = inv[c];
                if j <= i {
                    data[start[i] + j - first[i]] = v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            let row_i = start[i];
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                let (head, tail) = data.split_at_mut(row_i);
                let lj = &head[start[j]..start[j + 1]];
                let li = &mut tail[..i - fi + 1];
                let s: f64 = li[lo - fi..j - fi].iter().zip(&lj[lo - fj..j - fj]).map(|(x, y)| x * y).sum();
                li[j - fi] = (li[j - fi] - s) / lj[j - fj];
            }
            let li = &mut data[row_i..start[i + 1]];
            let d = li[i - fi] - li[..i - fi].iter().map(|x| x * x).sum::<f64>();
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::Factorization(format!("non-positive pivot at unknown {}", perm[i])));
            }
            li[i - fi] = d.sqrt();
        }
        Ok(CholeskyFactor {
            perm,
            first,
            start,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Stored entries of the factor.
    pub fn profile_size(&self) -> usize {
        self.data.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y: Vec<f64> = self.perm.iter().map(|&o| b[o]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let li = &self.data[self.start[i]..self.start[i + 1]];
            let s: f64 = li[..i - fi].iter().zip(&y[fi..i]).map(|(l, v)| l * v).sum();
            y[i] = (y[i] - s) / li[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let li = &self.data[self.start[i]..self.start[i + 1]];
            y[i] /= li[i - fi];
            let yi = y[i];
            for (l, v) in li[..i - fi].iter().zip(&mut y[fi..i]) {
                *v -= l * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

/// Solves A x = rhs by sparse Cholesky.
pub fn direct_solve(a: &SparseOperator, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != a.n_rows() {
        return Err(Error::DimensionMismatch(format!(
            "rhs has {} entries for a {}-row matrix",
            rhs.len(),
            a.n_rows()
        )));
    }
    Ok(CholeskyFactor::new(a)?.solve(rhs))
}
