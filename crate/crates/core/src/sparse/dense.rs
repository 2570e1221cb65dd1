use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Copy> DenseMatrix<S> {
    pub fn filled(rows: usize, cols: usize, value: S) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<S>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape(
                "DenseMatrix::from_vec",
                format!("{} values", rows * cols),
                data.len(),
            ));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds from a list of equally long rows.
    pub fn from_rows(rows: &[Vec<S>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::shape("DenseMatrix::from_rows", cols, r.len()));
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<S> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [S] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        self.data[i * self.cols + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut S {
        &mut self.data[i * self.cols + j]
    }

    pub fn fill(&mut self, value: S) {
        self.data.fill(value);
    }

    /// One mutable slice per row, for use as a kernel output sink.
    pub fn row_slices_mut(&mut self) -> Vec<&mut [S]> {
        if self.cols == 0 {
            return (0..self.rows).map(|_| <&mut [S]>::default()).collect();
        }
        self.data.chunks_mut(self.cols).collect()
    }
}

impl<S: Copy + Zero> DenseMatrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, S::zero())
    }

    pub fn set_zero(&mut self) {
        self.fill(S::zero());
    }
}

/// Read access to a row-addressable matrix operand.
pub trait Rows<S>: Sync {
    fn n_rows(&self) -> usize;
    fn n_cols(&self) -> usize;
    fn row(&self, i: usize) -> &[S];
}

impl<S: Copy + Sync> Rows<S> for DenseMatrix<S> {
    fn n_rows(&self) -> usize {
        self.rows
    }

    fn n_cols(&self) -> usize {
        self.cols
    }

    #[inline]
    fn row(&self, i: usize) -> &[S] {
        DenseMatrix::row(self, i)
    }
}

/// Two matrices with equal column counts viewed as one, `upper` first.
///
/// Used to address `[entities; relations]` without copying: row `N + j` of
/// the view is row `j` of `lower`.
#[derive(Debug, Clone, Copy)]
pub struct Stacked<'a, S> {
    upper: &'a DenseMatrix<S>,
    lower: &'a DenseMatrix<S>,
}

impl<'a, S: Copy> Stacked<'a, S> {
    pub fn new(upper: &'a DenseMatrix<S>, lower: &'a DenseMatrix<S>) -> Result<Self> {
        if upper.cols() != lower.cols() && upper.rows() > 0 && lower.rows() > 0 {
            return Err(Error::shape("stacked view", upper.cols(), lower.cols()));
        }
        Ok(Self { upper, lower })
    }

    pub fn to_dense(&self) -> DenseMatrix<S>
    where
        S: Sync,
    {
        let cols = self.n_cols();
        let mut data = Vec::with_capacity(self.n_rows() * cols);
        data.extend_from_slice(self.upper.data());
        data.extend_from_slice(self.lower.data());
        DenseMatrix {
            rows: self.n_rows(),
            cols,
            data,
        }
    }
}

impl<S: Copy + Sync> Rows<S> for Stacked<'_, S> {
    fn n_rows(&self) -> usize {
        self.upper.rows() + self.lower.rows()
    }

    fn n_cols(&self) -> usize {
        if self.upper.rows() > 0 {
            self.upper.cols()
        } else {
            self.lower.cols()
        }
    }

    #[inline]
    fn row(&self, i: usize) -> &[S] {
        let n = self.upper.rows();
        if i < n {
            self.upper.row(i)
        } else {
            self.lower.row(i - n)
        }
    }
}

/// Mutable row sinks for two stacked matrices, `upper` rows first.
pub fn stacked_row_slices_mut<'a, S: Copy>(
    upper: &'a mut DenseMatrix<S>,
    lower: &'a mut DenseMatrix<S>,
) -> Vec<&'a mut [S]> {
    let mut rows = upper.row_slices_mut();
    rows.extend(lower.row_slices_mut());
    rows
}

/// Reinterprets interleaved `(re, im)` pairs as complex numbers.
pub fn as_complex<T>(s: &[T]) -> &[Complex<T>] {
    assert!(s.len().is_multiple_of(2), "interleaved complex slice must have even length");
    // SAFETY: `Complex<T>` is `#[repr(C)]` with fields `re, im` of type T, so
    // it has the size of `[T; 2]` and the alignment of `T`.
    unsafe { std::slice::from_raw_parts(s.as_ptr().cast::<Complex<T>>(), s.len() / 2) }
}

pub fn as_complex_mut<T>(s: &mut [T]) -> &mut [Complex<T>] {
    assert!(s.len().is_multiple_of(2), "interleaved complex slice must have even length");
    // SAFETY: see `as_complex`; the borrow is unique.
    unsafe { std::slice::from_raw_parts_mut(s.as_mut_ptr().cast::<Complex<T>>(), s.len() / 2) }
}

/// Complex view over a real operand whose rows interleave `(re, im)`.
#[derive(Debug, Clone, Copy)]
pub struct ComplexRows<'a, R> {
    inner: &'a R,
}

impl<'a, R> ComplexRows<'a, R> {
    pub fn new<T>(inner: &'a R) -> Result<Self>
    where
        R: Rows<T>,
    {
        if inner.n_cols() % 2 != 0 {
            return Err(Error::shape("complex view", "even column count", inner.n_cols()));
        }
        Ok(Self { inner })
    }
}

impl<T: Sync, R: Rows<T>> Rows<Complex<T>> for ComplexRows<'_, R> {
    fn n_rows(&self) -> usize {
        self.inner.n_rows()
    }

    fn n_cols(&self) -> usize {
        self.inner.n_cols() / 2
    }

    #[inline]
    fn row(&self, i: usize) -> &[Complex<T>] {
        as_complex(self.inner.row(i))
    }
}

/// Complex row sinks over interleaved real row sinks.
pub fn complex_row_slices_mut<T>(rows: Vec<&mut [T]>) -> Vec<&mut [Complex<T>]> {
    rows.into_iter().map(as_complex_mut).collect()
}
