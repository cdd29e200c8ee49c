use super::Agglomeration;
use crate::error::{Error, Result};
use crate::sparse::SparseOperator;

const UNMARKED: usize = usize::MAX;

/// Algebraic aggregation: a greedy maximal independent set of the matrix
/// graph (visited in index order) provides the roots, and every other
/// unknown joins its most strongly coupled root.
pub fn aggregate_algebraic_mis(a: &SparseOperator) -> Result<Agglomeration> {
    let n = a.n_rows();
    if n == 0 || a.n_cols() != n {
        return Err(Error::InvalidArgument("MIS aggregation needs a non-empty square matrix".into()));
    }
    let mut root_of = vec![UNMARKED; n];
    let mut is_root = vec![false; n];
    let mut roots = 0;
    for i in 0..n {
        if root_of[i] != UNMARKED {
            continue;
        }
        let (cols, _) = a.row(i);
        if cols.iter().any(|&j| j != i && is_root[j]) {
            continue;
        }
        is_root[i] = true;
        root_of[i] = roots;
        roots += 1;
    }
    for i in 0..n {
        if is_root[i] {
            continue;
        }
        let (cols, vals) = a.row(i);
        let best = cols
            .iter()
            .zip(vals)
            .filter(|(&j, _)| j != i && is_root[j])
            .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()).then(y.0.cmp(x.0)))
            .map(|(&j, _)| j)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown {i} has no root neighbour")))?;
        root_of[i] = root_of[best];
    }
    Agglomeration::new(root_of)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_gives_singletons() {
        let a = SparseOperator::diagonal(&[1.0, 2.0, 3.0]);
        let agg = aggregate_algebraic_mis(&a).unwrap();
        assert_eq!(agg.coarse_count, 3);
    }

    #[test]
    fn path_roots_are_independent() {
        let mut t = Vec::new();
        for i in 0..5 {
            t.push((i, i, 2.0));
            if i + 1 < 5 {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = SparseOperator::from_triplets(5, 5, &t);
        let agg = aggregate_algebraic_mis(&a).unwrap();
        // roots 0, 2, 4
        assert_eq!(agg.coarse_count, 3);
        assert_eq!(agg.fine_to_coarse[0], 0);
        assert_eq!(agg.fine_to_coarse[2], 1);
        assert_eq!(agg.fine_to_coarse[4], 2);
    }

    #[test]
    fn empty_rejected() {
        let a = SparseOperator::from_triplets(0, 0, &[]);
        assert!(aggregate_algebraic_mis(&a).is_err());
    }
}
