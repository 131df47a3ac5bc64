//! Compressed-row sparse matrices.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SparseError {
    #[error("entry ({row}, {col}) outside {rows}x{cols}")]
    OutOfRange { row: usize, col: usize, rows: usize, cols: usize },
    #[error("duplicate entry ({row}, {col})")]
    Duplicate { row: usize, col: usize },
    #[error("cannot multiply {lhs_rows}x{lhs_cols} by {rhs_rows}x{rhs_cols}")]
    DimensionMismatch { lhs_rows: usize, lhs_cols: usize, rhs_rows: usize, rhs_cols: usize },
}

/// CSR matrix. Within each row, column indices are strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols, row_ptr: vec![0; rows + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            rows: n,
            cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Builds from `(row, col, value)` triplets in any order. Explicit zeros are kept.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, SparseError> {
        let mut entries: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        for &(row, col, _) in &entries {
            if row >= rows || col >= cols {
                return Err(SparseError::OutOfRange { row, col, rows, cols });
            }
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));
        if let Some(w) = entries.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(SparseError::Duplicate { row: w[0].0, col: w[0].1 });
        }
        let mut row_ptr = vec![0usize; rows + 1];
        for &(r, _, _) in &entries {
            row_ptr[r + 1] += 1;
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        let (col_idx, values) = entries.into_iter().map(|(_, c, v)| (c, v)).unzip();
        Ok(SparseMatrix { rows, cols, row_ptr, col_idx, values })
    }

    /// Dense row-major input; zeros are dropped.
    pub fn from_dense(rows: usize, cols: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), rows * cols, "dense data has wrong length");
        let triplets = (0..rows)
            .flat_map(|r| (0..cols).map(move |c| (r, c)))
            .filter_map(|(r, c)| {
                let v = data[r * cols + c];
                (v != 0.0).then_some((r, c, v))
            });
        SparseMatrix::from_triplets(rows, cols, triplets).expect("dense input is always in range")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.col_idx[span.clone()], &self.values[span])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// Entries in (row, col) order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut row_ptr = vec![0usize; self.cols + 1];
        for &c in &self.col_idx {
            row_ptr[c + 1] += 1;
        }
        for i in 0..self.cols {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut next = row_ptr.clone();
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        // rows visited in increasing order keep each transposed row sorted
        for (r, c, v) in self.iter() {
            let slot = next[c];
            col_idx[slot] = r;
            values[slot] = v;
            next[c] += 1;
        }
        SparseMatrix { rows: self.cols, cols: self.rows, row_ptr, col_idx, values }
    }

    /// Row-wise product `self · rhs`. Each output row is accumulated in a
    /// dense scratch buffer and its touched columns sorted, so entry order
    /// is deterministic. Structural zeros produced by cancellation are kept.
    pub fn matmul(&self, rhs: &SparseMatrix) -> Result<SparseMatrix, SparseError> {
        if self.cols != rhs.rows {
            return Err(SparseError::DimensionMismatch {
                lhs_rows: self.rows,
                lhs_cols: self.cols,
                rhs_rows: rhs.rows,
                rhs_cols: rhs.cols,
            });
        }
        let mut acc = vec![0.0f64; rhs.cols];
        let mut seen = vec![false; rhs.cols];
        let mut touched: Vec<usize> = Vec::new();
        let mut row_ptr = Vec::with_capacity(self.rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for r in 0..self.rows {
            let (lcols, lvals) = self.row(r);
            for (&k, &a) in lcols.iter().zip(lvals) {
                let (rcols, rvals) = rhs.row(k);
                for (&c, &b) in rcols.iter().zip(rvals) {
                    if !seen[c] {
                        seen[c] = true;
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                col_idx.push(c);
                values.push(acc[c]);
                acc[c] = 0.0;
                seen[c] = false;
            }
            touched.clear();
            row_ptr.push(col_idx.len());
        }
        Ok(SparseMatrix { rows: self.rows, cols: rhs.cols, row_ptr, col_idx, values })
    }

    /// Same pattern, every stored nonzero replaced by 1. Stored zeros are dropped.
    pub fn binarize(&self) -> SparseMatrix {
        let triplets = self.iter().filter(|&(_, _, v)| v != 0.0).map(|(r, c, _)| (r, c, 1.0));
        SparseMatrix::from_triplets(self.rows, self.cols, triplets).expect("pattern of a valid matrix")
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows * self.cols];
        for (r, c, v) in self.iter() {
            out[r * self.cols + c] = v;
        }
        out
    }

    pub fn to_dense_rows(&self) -> Vec<Vec<f64>> {
        let dense = self.to_dense();
        if self.cols == 0 {
            return vec![Vec::new(); self.rows];
        }
        dense.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    /// Coordinate-list dump, one `row col value` line per entry in sorted order.
    pub fn to_coo_text(&self) -> String {
        let mut out = String::new();
        for (r, c, v) in self.iter() {
            let _ = writeln!(out, "{r} {c} {v}");
        }
        out
    }

    pub fn same_pattern(&self, other: &SparseMatrix) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.row_ptr == other.row_ptr
            && self.col_idx == other.col_idx
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense_matmul(a: &[f64], b: &[f64], n: usize, k: usize, m: usize) -> Vec<f64> {
        let mut out = vec![0.0; n * m];
        for i in 0..n {
            for j in 0..m {
                out[i * m + j] = (0..k).map(|t| a[i * k + t] * b[t * m + j]).sum();
            }
        }
        out
    }

    #[test]
    fn identity_and_zero_products() {
        let a = SparseMatrix::from_dense(2, 3, &[1.0, 0.0, 2.0, 0.0, 3.0, 0.0]);
        assert_eq!(SparseMatrix::identity(2).matmul(&a).unwrap(), a);
        let z = a.matmul(&SparseMatrix::zeros(3, 4)).unwrap();
        assert_eq!(z.nnz(), 0);
        assert_eq!((z.rows(), z.cols()), (2, 4));
    }

    #[test]
    fn dimension_mismatch() {
        let a = SparseMatrix::zeros(2, 3);
        assert!(matches!(a.matmul(&a), Err(SparseError::DimensionMismatch { .. })));
    }

    #[test]
    fn triplet_validation() {
        assert!(matches!(
            SparseMatrix::from_triplets(2, 2, [(0, 0, 1.0), (0, 0, 2.0)]),
            Err(SparseError::Duplicate { row: 0, col: 0 })
        ));
        assert!(matches!(SparseMatrix::from_triplets(2, 2, [(2, 0, 1.0)]), Err(SparseError::OutOfRange { .. })));
        let m = SparseMatrix::from_triplets(2, 3, [(1, 2, 5.0), (0, 1, 1.0), (1, 0, 2.0)]).unwrap();
        assert_eq!(m.iter().collect::<Vec<_>>(), vec![(0, 1, 1.0), (1, 0, 2.0), (1, 2, 5.0)]);
        assert_eq!(m.to_coo_text(), "0 1 1\n1 0 2\n1 2 5\n");
    }

    proptest! {
        #[test]
        fn matmul_matches_dense(
            n in 1usize..6, k in 1usize..6, m in 1usize..6,
            seed_a in proptest::collection::vec(-2i32..3, 36),
            seed_b in proptest::collection::vec(-2i32..3, 36),
        ) {
            let a: Vec<f64> = seed_a[..n * k].iter().map(|&v| v as f64).collect();
            let b: Vec<f64> = seed_b[..k * m].iter().map(|&v| v as f64).collect();
            let sa = SparseMatrix::from_dense(n, k, &a);
            let sb = SparseMatrix::from_dense(k, m, &b);
            let prod = sa.matmul(&sb).unwrap();
            prop_assert_eq!(prod.to_dense(), dense_matmul(&a, &b, n, k, m));
            prop_assert_eq!(sa.transpose().transpose(), sa.clone());
            let t = sa.transpose();
            for (r, c, v) in sa.iter() {
                prop_assert_eq!(t.get(c, r), v);
            }
        }
    }
}
