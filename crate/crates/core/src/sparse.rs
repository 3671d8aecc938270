//! Sparse storage of the transition operator.
//!
//! The matrix is stored as CSR of P^T, not of P: row r of the stored
//! structure holds the entries of column r of P. Every hot loop in the
//! solver multiplies by P^T, so this layout makes x -> P^T x a plain row
//! sweep. Within a row, entries are kept sorted by column index and
//! accumulated in that order, which pins the floating-point summation
//! order and keeps convergence histories reproducible run to run.

use crate::block::DenseBlock;
use crate::error::{Error, Result};

/// Row sums of P may deviate from 1 by at most this much at load time;
/// generous enough for decimal-text round trips of double entries.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Validated, immutable transition matrix in CSR-of-P^T form.
#[derive(Debug, Clone)]
pub struct SparseTransitionMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Result of the strong-connectivity pass; advisory only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectivityReport {
    pub components: usize,
    pub irreducible: bool,
}

impl SparseTransitionMatrix {
    /// Builds from (row, col, value) triples of P, 0-based.
    ///
    /// Rejects negative or >1 entries, duplicate coordinates, and any row
    /// of P whose entries do not sum to 1 within [`ROW_SUM_TOL`].
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameters { msg: "empty matrix".into() });
        }
        let mut row_sums = vec![0.0; n];
        // Bucket by storage row (= column of P), keep P-row as col index.
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::InvalidParameters {
                    msg: format!("entry ({i}, {j}) outside {n} x {n}"),
                });
            }
            if !v.is_finite() || v < 0.0 || v > 1.0 {
                return Err(Error::Stochasticity {
                    row: i,
                    detail: format!("entry ({i}, {j}) = {v} outside [0, 1]"),
                });
            }
            row_sums[i] += v;
            rows[j].push((i, v));
        }
        for (i, sum) in row_sums.iter().enumerate() {
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::Stochasticity {
                    row: i,
                    detail: format!("sums to {sum:.17}"),
                });
            }
        }

        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for (r, bucket) in rows.iter_mut().enumerate() {
            bucket.sort_by_key(|&(c, _)| c);
            for w in bucket.windows(2) {
                if w[0].0 == w[1].0 {
                    // Stored row r is column r of P; the duplicate is at
                    // P's coordinates (c, r).
                    return Err(Error::DuplicateEntry { row: w[0].0, col: r });
                }
            }
            for &(c, v) in bucket.iter() {
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(SparseTransitionMatrix { n, row_ptr, col_idx, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Entry P(i, j), by binary search in the stored row j.
    pub fn p_entry(&self, i: usize, j: usize) -> f64 {
        let lo = self.row_ptr[j];
        let hi = self.row_ptr[j + 1];
        match self.col_idx[lo..hi].binary_search(&i) {
            Ok(k) => self.values[lo + k],
            Err(_) => 0.0,
        }
    }

    /// Stored entries of P as (row, col, value) triples of P, sorted by
    /// (row, col).
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                out.push((self.col_idx[k], r, self.values[k]));
            }
        }
        out.sort_by_key(|&(i, j, _)| (i, j));
        out
    }

    /// Computes P^T X in one pass over the stored nonzeros.
    ///
    /// The s output columns are produced inside a single sweep; per
    /// output entry the contributions accumulate in ascending stored
    /// index, so a block application is bit-for-bit identical to s
    /// single-column applications.
    pub fn apply_transpose(&self, x: &DenseBlock) -> Result<DenseBlock> {
        if x.rows() != self.n {
            return Err(Error::DimensionMismatch {
                expected: format!("{} rows", self.n),
                got: format!("{} rows", x.rows()),
            });
        }
        let s = x.cols();
        let mut out = DenseBlock::zeros(self.n, s)?;
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col_idx[k];
                let v = self.values[k];
                for j in 0..s {
                    out.set(r, j, out.get(r, j) + v * x.get(c, j));
                }
            }
        }
        Ok(out)
    }

    /// Strongly connected components of the sparsity pattern (entries
    /// > 0), via Kosaraju's two passes with explicit stacks. Warn-only:
    /// reducible chains may still be iterated on.
    pub fn check_strong_connectivity(&self) -> ConnectivityReport {
        let n = self.n;
        // Stored structure is the reverse graph (row r lists i with
        // P(i, r) > 0); build the forward adjacency once.
        let mut fwd: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
        for r in 0..n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.values[k] > 0.0 {
                    let i = self.col_idx[k];
                    if i != r {
                        fwd[i].push(r);
                        rev[r].push(i);
                    }
                }
            }
        }

        // Pass 1: finish order on the forward graph.
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            seen[start] = true;
            while let Some(&(v, next)) = stack.last() {
                if next < fwd[v].len() {
                    stack.last_mut().unwrap().1 += 1;
                    let w = fwd[v][next];
                    if !seen[w] {
                        seen[w] = true;
                        stack.push((w, 0));
                    }
                } else {
                    order.push(v);
                    stack.pop();
                }
            }
        }

        // Pass 2: sweep the reverse graph in reverse finish order.
        let mut comp = vec![usize::MAX; n];
        let mut components = 0;
        for &start in order.iter().rev() {
            if comp[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            comp[start] = components;
            while let Some(v) = stack.pop() {
                for &w in &rev[v] {
                    if comp[w] == usize::MAX {
                        comp[w] = components;
                        stack.push(w);
                    }
                }
            }
            components += 1;
        }
        ConnectivityReport { components, irreducible: components == 1 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::norm1;

    fn identity2() -> SparseTransitionMatrix {
        SparseTransitionMatrix::from_triplets(2, &[(0, 0, 1.0), (1, 1, 1.0)]).unwrap()
    }

    #[test]
    fn rejects_bad_row_sum() {
        let err = SparseTransitionMatrix::from_triplets(
            2,
            &[(0, 0, 1.0), (1, 0, 0.5), (1, 1, 0.499)],
        )
        .unwrap_err();
        match err {
            Error::Stochasticity { row, .. } => assert_eq!(row, 1),
            other => panic!("expected stochasticity error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_negative_and_duplicate() {
        let err =
            SparseTransitionMatrix::from_triplets(2, &[(0, 0, -0.1), (0, 1, 1.1), (1, 1, 1.0)])
                .unwrap_err();
        assert!(matches!(err, Error::Stochasticity { row: 0, .. }));

        let err = SparseTransitionMatrix::from_triplets(
            2,
            &[(0, 0, 0.5), (0, 0, 0.5), (1, 1, 1.0)],
        )
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateEntry { row: 0, col: 0 }));
    }

    #[test]
    fn rejects_dangling_row() {
        // Row 1 of P has no entries at all.
        let err = SparseTransitionMatrix::from_triplets(2, &[(0, 0, 1.0)]).unwrap_err();
        assert!(matches!(err, Error::Stochasticity { row: 1, .. }));
    }

    #[test]
    fn apply_transpose_identity_is_noop() {
        let a = identity2();
        let x = DenseBlock::from_columns(&[&[0.25, 0.75], &[0.9, 0.1]]).unwrap();
        let y = a.apply_transpose(&x).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn apply_transpose_shapes() {
        let a = identity2();
        let x = DenseBlock::zeros(3, 1).unwrap();
        assert!(matches!(a.apply_transpose(&x), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn apply_transpose_is_pt_not_p() {
        // P = [[0, 1], [1, 0]] applied to e0 must give e1 under P^T.
        let a =
            SparseTransitionMatrix::from_triplets(2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        let x = DenseBlock::from_columns(&[&[1.0, 0.0]]).unwrap();
        let y = a.apply_transpose(&x).unwrap();
        assert_eq!(y.column(0), &[0.0, 1.0]);
    }

    #[test]
    fn probability_columns_stay_probability() {
        let a = SparseTransitionMatrix::from_triplets(
            3,
            &[
                (0, 1, 0.6),
                (0, 2, 0.4),
                (1, 0, 0.5),
                (1, 1, 0.5),
                (2, 0, 1.0),
            ],
        )
        .unwrap();
        let mut x = DenseBlock::from_columns(&[&[0.2, 0.3, 0.5]]).unwrap();
        for _ in 0..100 {
            x = a.apply_transpose(&x).unwrap();
            assert!((norm1(x.column(0)) - 1.0).abs() < 1e-14);
            assert!(x.column(0).iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn p_entry_lookup() {
        let a = SparseTransitionMatrix::from_triplets(
            3,
            &[
                (0, 1, 0.6),
                (0, 2, 0.4),
                (1, 0, 0.5),
                (1, 1, 0.5),
                (2, 0, 1.0),
            ],
        )
        .unwrap();
        assert_eq!(a.p_entry(0, 1), 0.6);
        assert_eq!(a.p_entry(1, 1), 0.5);
        assert_eq!(a.p_entry(2, 2), 0.0);
        assert_eq!(a.nnz(), 5);
    }

    #[test]
    fn connectivity_identity_vs_cycle() {
        let id = identity2();
        let rep = id.check_strong_connectivity();
        assert_eq!(rep, ConnectivityReport { components: 2, irreducible: false });

        let cycle =
            SparseTransitionMatrix::from_triplets(2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        assert!(cycle.check_strong_connectivity().irreducible);
    }

    #[test]
    fn connectivity_two_blocks() {
        // Disjoint union of two 2-cycles.
        let a = SparseTransitionMatrix::from_triplets(
            4,
            &[(0, 1, 1.0), (1, 0, 1.0), (2, 3, 1.0), (3, 2, 1.0)],
        )
        .unwrap();
        let rep = a.check_strong_connectivity();
        assert_eq!(rep.components, 2);
        assert!(!rep.irreducible);
    }

    #[test]
    fn triplets_round_trip_order() {
        let t = vec![(0usize, 1usize, 0.6), (0, 2, 0.4), (1, 0, 0.5), (1, 1, 0.5), (2, 0, 1.0)];
        let a = SparseTransitionMatrix::from_triplets(3, &t).unwrap();
        assert_eq!(a.triplets(), t);
    }
}
