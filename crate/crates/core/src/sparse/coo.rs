use crate::error::{Error, Result};
use crate::scalar::Real;

use super::csr::CsrMatrix;
use super::dense::DenseMatrix;

/// Coordinate-format sparse matrix.
///
/// Entries are kept in insertion order and may repeat a `(row, col)` pair;
/// repeats are summed by [`CooMatrix::to_csr`]. Zero values are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct CooMatrix<T> {
    shape: (usize, usize),
    rows: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Real> CooMatrix<T> {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        Self::with_capacity(n_rows, n_cols, 0)
    }

    pub fn with_capacity(n_rows: usize, n_cols: usize, nnz: usize) -> Self {
        Self {
            shape: (n_rows, n_cols),
            rows: Vec::with_capacity(nnz),
            cols: Vec::with_capacity(nnz),
            vals: Vec::with_capacity(nnz),
        }
    }

    /// Builds a matrix from parallel index/value arrays, validating bounds.
    pub fn from_triplets(
        shape: (usize, usize),
        rows: Vec<usize>,
        cols: Vec<usize>,
        vals: Vec<T>,
    ) -> Result<Self> {
        if rows.len() != cols.len() || rows.len() != vals.len() {
            return Err(Error::Structure(format!(
                "COO arrays differ in length: rows={}, cols={}, vals={}",
                rows.len(),
                cols.len(),
                vals.len()
            )));
        }
        let mut m = Self::with_capacity(shape.0, shape.1, rows.len());
        for ((r, c), v) in rows.into_iter().zip(cols).zip(vals) {
            m.push(r, c, v)?;
        }
        Ok(m)
    }

    /// Appends an entry. Zero values are silently skipped.
    pub fn push(&mut self, row: usize, col: usize, val: T) -> Result<()> {
        if row >= self.shape.0 || col >= self.shape.1 {
            return Err(Error::Structure(format!(
                "entry ({row}, {col}) outside shape {}x{}",
                self.shape.0, self.shape.1
            )));
        }
        if val != T::zero() {
            self.rows.push(row);
            self.cols.push(col);
            self.vals.push(val);
        }
        Ok(())
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    pub fn vals(&self) -> &[T] {
        &self.vals
    }

    /// Dense copy with duplicate entries summed.
    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut out = DenseMatrix::zeros(self.shape.0, self.shape.1);
        for ((&r, &c), &v) in self.rows.iter().zip(&self.cols).zip(&self.vals) {
            *out.get_mut(r, c) += v;
        }
        out
    }

    /// Converts to canonical CSR: columns strictly increasing within each
    /// row, duplicates summed in insertion order, cancelled entries dropped.
    pub fn to_csr(&self) -> CsrMatrix<T> {
        let (n_rows, n_cols) = self.shape;
        let mut counts = vec![0usize; n_rows + 1];
        for &r in &self.rows {
            counts[r + 1] += 1;
        }
        for i in 0..n_rows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut bucket: Vec<(usize, T)> = vec![(0, T::zero()); self.nnz()];
        for ((&r, &c), &v) in self.rows.iter().zip(&self.cols).zip(&self.vals) {
            bucket[next[r]] = (c, v);
            next[r] += 1;
        }

        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut col_idx = Vec::with_capacity(self.nnz());
        let mut vals = Vec::with_capacity(self.nnz());
        row_ptr.push(0);
        for i in 0..n_rows {
            let row = &mut bucket[counts[i]..counts[i + 1]];
            // stable: duplicates are merged in insertion order
            row.sort_by_key(|&(c, _)| c);
            let mut j = 0;
            while j < row.len() {
                let (c, mut acc) = row[j];
                j += 1;
                while j < row.len() && row[j].0 == c {
                    acc += row[j].1;
                    j += 1;
                }
                if acc != T::zero() {
                    col_idx.push(c);
                    vals.push(acc);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix::from_canonical_parts((n_rows, n_cols), row_ptr, col_idx, vals)
    }
}
