//! Compressed-sparse-row matrices.

use crate::error::{Error, Result};
use rayon::prelude::*;
use std::io::Write;

/// Rows per rayon task in matrix-vector products. Each row is reduced
/// sequentially, so the result is independent of the thread count.
const PAR_ROW_CHUNK: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    symmetric: bool,
}

impl SparseOperator {
    /// Builds a matrix from (row, col, value) triplets; duplicates are summed
    /// in input order and columns are sorted within each row.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; n_rows + 1];
        for &(r, c, _) in triplets {
            assert!(r < n_rows && c < n_cols, "triplet ({r},{c}) out of bounds");
            counts[r + 1] += 1;
        }
        for i in 0..n_rows {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(r, c, v) in triplets {
            cols[fill[r]] = c;
            vals[fill[r]] = v;
            fill[r] += 1;
        }
        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut perm: Vec<usize> = Vec::new();
        for i in 0..n_rows {
            let (s, e) = (counts[i], counts[i + 1]);
            perm.clear();
            perm.extend(s..e);
            // stable: duplicates are accumulated in input order
            perm.sort_by_key(|&k| cols[k]);
            let mut last = usize::MAX;
            for &k in &perm {
                if cols[k] == last {
                    *values.last_mut().unwrap() += vals[k];
                } else {
                    col_idx.push(cols[k]);
                    values.push(vals[k]);
                    last = cols[k];
                }
            }
            row_ptr.push(col_idx.len());
        }
        SparseOperator {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
            symmetric: false,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        SparseOperator {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: d.to_vec(),
            symmetric: true,
        }
    }

    /// Dense row-major input; exact zeros are dropped.
    pub fn from_dense(n_rows: usize, n_cols: usize, a: &[f64]) -> Self {
        let mut t = Vec::new();
        for i in 0..n_rows {
            for j in 0..n_cols {
                let v = a[i * n_cols + j];
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n_rows, n_cols, &t)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Marks the matrix symmetric after checking the value asymmetry against
    /// `1e-12 * max|A|`.
    pub fn with_symmetry_checked(mut self) -> Result<Self> {
        let asym = self.asymmetry();
        let scale = self.max_abs();
        if self.n_rows != self.n_cols || asym > 1e-12 * scale {
            return Err(Error::DimensionMismatch(format!(
                "matrix is not symmetric: max|A - A^T| = {asym:e}, max|A| = {scale:e}"
            )));
        }
        self.symmetric = true;
        Ok(self)
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[s..e], &self.values[s..e])
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// max |A_ij - A_ji| over the stored pattern of both.
    pub fn asymmetry(&self) -> f64 {
        let t = self.transpose();
        let mut m: f64 = 0.0;
        for i in 0..self.n_rows {
            let (c1, v1) = self.row(i);
            let (c2, v2) = t.row(i);
            let (mut a, mut b) = (0, 0);
            while a < c1.len() || b < c2.len() {
                let ca = c1.get(a).copied().unwrap_or(usize::MAX);
                let cb = c2.get(b).copied().unwrap_or(usize::MAX);
                if ca == cb {
                    m = m.max((v1[a] - v2[b]).abs());
                    a += 1;
                    b += 1;
                } else if ca < cb {
                    m = m.max(v1[a].abs());
                    a += 1;
                } else {
                    m = m.max(v2[b].abs());
                    b += 1;
                }
            }
        }
        m
    }

    pub fn transpose(&self) -> SparseOperator {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for j in 0..self.n_cols {
            counts[j + 1] += counts[j];
        }
        let mut fill = counts.clone();
        let mut col_idx = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                col_idx[fill[c]] = i;
                values[fill[c]] = v;
                fill[c] += 1;
            }
        }
        SparseOperator {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_ptr: counts,
            col_idx,
            values,
            symmetric: self.symmetric,
        }
    }

    /// y = A x
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n_cols);
        assert_eq!(y.len(), self.n_rows);
        let row = |i: usize| {
            let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut acc = 0.0;
            for k in s..e {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            acc
        };
        if self.n_rows >= 4 * PAR_ROW_CHUNK {
            y.par_chunks_mut(PAR_ROW_CHUNK).enumerate().for_each(|(c, chunk)| {
                let base = c * PAR_ROW_CHUNK;
                for (k, yi) in chunk.iter_mut().enumerate() {
                    *yi = row(base + k);
                }
            });
        } else {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = row(i);
            }
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_rows];
        self.matvec_into(x, &mut y);
        y
    }

    /// r = b - A x
    pub fn residual_into(&self, b: &[f64], x: &[f64], r: &mut [f64]) {
        self.matvec_into(x, r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
    }

    /// Sparse product self * other.
    pub fn matmul(&self, other: &SparseOperator) -> SparseOperator {
        assert_eq!(self.n_cols, other.n_rows);
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut acc = vec![0.0; other.n_cols];
        let mut mark = vec![usize::MAX; other.n_cols];
        let mut touched = Vec::new();
        for i in 0..self.n_rows {
            touched.clear();
            let (ca, va) = self.row(i);
            for (&k, &a) in ca.iter().zip(va) {
                let (cb, vb) = other.row(k);
                for (&j, &b) in cb.iter().zip(vb) {
                    if mark[j] != i {
                        mark[j] = i;
                        acc[j] = 0.0;
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                col_idx.push(j);
                values.push(acc[j]);
            }
            row_ptr.push(col_idx.len());
        }
        SparseOperator {
            n_rows: self.n_rows,
            n_cols: other.n_cols,
            row_ptr,
            col_idx,
            values,
            symmetric: false,
        }
    }

    /// Galerkin triple product R A P with R = P^T, symmetrised.
    pub fn galerkin(&self, p: &SparseOperator) -> SparseOperator {
        let rap = p.transpose().matmul(&self.matmul(p));
        let t = rap.transpose();
        let mut trip = Vec::with_capacity(2 * rap.nnz());
        for i in 0..rap.n_rows {
            for (m, w) in [(&rap, 0.5), (&t, 0.5)] {
                let (c, v) = m.row(i);
                trip.extend(c.iter().zip(v).map(|(&j, &x)| (i, j, w * x)));
            }
        }
        let mut out = SparseOperator::from_triplets(rap.n_rows, rap.n_cols, &trip);
        out.symmetric = true;
        out
    }

    /// Matrix Market coordinate export. `symmetric` writes the lower
    /// triangle under a `symmetric` header; otherwise every stored entry is
    /// written under a `general` header. Indices are 1-based.
    pub fn write_matrix_market<W: Write>(&self, mut w: W, symmetric: bool) -> std::io::Result<()> {
        let kind = if symmetric { "symmetric" } else { "general" };
        writeln!(w, "%%MatrixMarket matrix coordinate real {kind}")?;
        let entries: Vec<(usize, usize, f64)> = (0..self.n_rows)
            .flat_map(|i| {
                let (c, v) = self.row(i);
                c.iter().zip(v).map(move |(&j, &x)| (i, j, x)).collect::<Vec<_>>()
            })
            .filter(|&(i, j, _)| !symmetric || j <= i)
            .collect();
        writeln!(w, "{} {} {}", self.n_rows, self.n_cols, entries.len())?;
        for (i, j, x) in entries {
            writeln!(w, "{} {} {:.17e}", i + 1, j + 1, x)?;
        }
        Ok(())
    }

    /// Dense row-major copy; intended for small matrices in tests and oracles.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n_rows * self.n_cols];
        for i in 0..self.n_rows {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                d[i * self.n_cols + j] = x;
            }
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates() {
        let a = SparseOperator::from_triplets(2, 2, &[(0, 1, 1.0), (0, 0, 2.0), (0, 1, 3.0), (1, 1, 5.0)]);
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(0, 1), 4.0);
        assert_eq!(a.matvec(&[1.0, 1.0]), vec![6.0, 5.0]);
    }

    #[test]
    fn transpose_and_product() {
        let a = SparseOperator::from_dense(2, 3, &[1.0, 0.0, 2.0, 0.0, 3.0, 0.0]);
        let at = a.transpose();
        assert_eq!(at.to_dense(), vec![1.0, 0.0, 0.0, 3.0, 2.0, 0.0]);
        let aat = a.matmul(&at);
        assert_eq!(aat.to_dense(), vec![5.0, 0.0, 0.0, 9.0]);
    }

    #[test]
    fn symmetry_check() {
        let a = SparseOperator::from_dense(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(a.clone().with_symmetry_checked().unwrap().is_symmetric());
        let b = SparseOperator::from_dense(2, 2, &[1.0, 2.0, 2.5, 1.0]);
        assert!(b.with_symmetry_checked().is_err());
    }

    #[test]
    fn matrix_market_header() {
        let a = SparseOperator::from_dense(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let mut buf = Vec::new();
        a.write_matrix_market(&mut buf, true).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("%%MatrixMarket matrix coordinate real symmetric"));
        assert_eq!(lines.next(), Some("2 2 3"));
    }

    #[test]
    fn large_matvec_matches_serial() {
        let n = 3000;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 + i as f64 * 1e-3));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = SparseOperator::from_triplets(n, n, &t);
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let y = a.matvec(&x);
        for i in [0, 1, 1500, n - 1] {
            let (c, v) = a.row(i);
            let r: f64 = c.iter().zip(v).map(|(&j, &w)| w * x[j]).sum();
            assert_eq!(y[i], r);
        }
    }
}
