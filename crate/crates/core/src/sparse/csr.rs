use crate::error::{Error, Result};
use crate::scalar::Real;

use super::dense::DenseMatrix;

/// Compressed sparse row matrix in canonical form.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    shape: (usize, usize),
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    /// Validating constructor.
    pub fn from_parts(
        shape: (usize, usize),
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        vals: Vec<T>,
    ) -> Result<Self> {
        let (n_rows, n_cols) = shape;
        if row_ptr.len() != n_rows + 1 {
            return Err(Error::Structure(format!(
                "row_ptr has length {}, expected {}",
                row_ptr.len(),
                n_rows + 1
            )));
        }
        if col_idx.len() != vals.len() {
            return Err(Error::Structure("col_idx and vals differ in length".into()));
        }
        if row_ptr[0] != 0 || row_ptr[n_rows] != vals.len() {
            return Err(Error::Structure("row_ptr must start at 0 and end at nnz".into()));
        }
        for i in 0..n_rows {
            let (lo, hi) = (row_ptr[i], row_ptr[i + 1]);
            if lo > hi {
                return Err(Error::Structure(format!("row_ptr decreases at row {i}")));
            }
            let cols = &col_idx[lo..hi];
            if cols.iter().any(|&c| c >= n_cols) {
                return Err(Error::Structure(format!("column out of range in row {i}")));
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Structure(format!(
                    "columns not strictly increasing in row {i}"
                )));
            }
        }
        Ok(Self::from_canonical_parts(shape, row_ptr, col_idx, vals))
    }

    pub(crate) fn from_canonical_parts(
        shape: (usize, usize),
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        vals: Vec<T>,
    ) -> Self {
        debug_assert_eq!(row_ptr.len(), shape.0 + 1);
        Self {
            shape,
            row_ptr,
            col_idx,
            vals,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_canonical_parts((n, n), (0..=n).collect(), (0..n).collect(), vec![T::one(); n])
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn n_rows(&self) -> usize {
        self.shape.0
    }

    pub fn n_cols(&self) -> usize {
        self.shape.1
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn vals(&self) -> &[T] {
        &self.vals
    }

    /// Column indices and values stored in row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[lo..hi], &self.vals[lo..hi])
    }

    pub fn transpose(&self) -> Self {
        self.transpose_with_permutation().0
    }

    /// Transposes and also returns, for every stored entry of the result, the
    /// position of that entry in `self.vals()`.
    ///
    /// Entries within a transposed row appear in increasing original-row
    /// order, so reductions over them are deterministic.
    pub fn transpose_with_permutation(&self) -> (Self, Vec<usize>) {
        let (n_rows, n_cols) = self.shape;
        let mut row_ptr = vec![0usize; n_cols + 1];
        for &c in &self.col_idx {
            row_ptr[c + 1] += 1;
        }
        for c in 0..n_cols {
            row_ptr[c + 1] += row_ptr[c];
        }
        let mut next = row_ptr.clone();
        let mut col_idx = vec![0usize; self.nnz()];
        let mut vals = vec![T::zero(); self.nnz()];
        let mut perm = vec![0usize; self.nnz()];
        for i in 0..n_rows {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let c = self.col_idx[p];
                let q = next[c];
                col_idx[q] = i;
                vals[q] = self.vals[p];
                perm[q] = p;
                next[c] += 1;
            }
        }
        (
            Self::from_canonical_parts((n_cols, n_rows), row_ptr, col_idx, vals),
            perm,
        )
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut out = DenseMatrix::zeros(self.shape.0, self.shape.1);
        for i in 0..self.shape.0 {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                *out.get_mut(i, c) = v;
            }
        }
        out
    }

    /// Fraction of cells that hold a stored entry.
    pub fn density(&self) -> f64 {
        let cells = self.shape.0 as f64 * self.shape.1 as f64;
        if cells == 0.0 {
            0.0
        } else {
            self.nnz() as f64 / cells
        }
    }
}
