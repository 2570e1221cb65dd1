//! SpMM kernels.
//!
//! Forward products are row-parallel over output rows. Backward products
//! never scatter: they run over the rows of the transposed incidence, so each
//! output row is owned by one task and reduced in increasing source-row
//! order. Results are bitwise identical for any thread count.

use std::ops::Add;

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::csr::CsrMatrix;
use super::dense::{DenseMatrix, Rows};
use super::semiring::{ProductSemiring, Semiring};

/// Semiring sparse-dense product `A ⊗ X` over the stored entries of `A`.
pub fn spmm<T, S, X>(a: &CsrMatrix<T>, x: &X, semiring: &S) -> Result<DenseMatrix<S::Elem>>
where
    T: Real,
    S: Semiring<T>,
    X: Rows<S::Elem> + ?Sized,
{
    let mut out = DenseMatrix::filled(a.n_rows(), x.n_cols(), semiring.add_identity());
    spmm_into(a, x, semiring, &mut out)?;
    Ok(out)
}

/// [`spmm`] into a caller-owned `rows(A) × cols(X)` buffer, overwriting it.
pub fn spmm_into<T, S, X>(a: &CsrMatrix<T>, x: &X, semiring: &S, out: &mut DenseMatrix<S::Elem>) -> Result<()>
where
    T: Real,
    S: Semiring<T>,
    X: Rows<S::Elem> + ?Sized,
{
    if a.n_cols() != x.n_rows() {
        return Err(Error::shape("spmm", format!("{} dense rows", a.n_cols()), x.n_rows()));
    }
    let d = x.n_cols();
    if out.shape() != (a.n_rows(), d) {
        return Err(Error::shape("spmm", format!("{}x{} output", a.n_rows(), d), format!("{:?}", out.shape())));
    }
    if d == 0 {
        return Ok(());
    }
    out.data_mut()
        .par_chunks_mut(d)
        .enumerate()
        .for_each(|(i, orow)| {
            orow.fill(semiring.add_identity());
            let (cols, vals) = a.row(i);
            for (&k, &v) in cols.iter().zip(vals) {
                let xrow = x.row(k);
                for (o, &xv) in orow.iter_mut().zip(xrow) {
                    *o = semiring.add(*o, semiring.mul(v, xv));
                }
            }
        });
    Ok(())
}

/// `Aᵀ · G` under plus-times, returned as a new `K × d` matrix.
pub fn spmm_transpose<T, G>(a: &CsrMatrix<T>, g: &G) -> Result<DenseMatrix<T>>
where
    T: Real,
    G: Rows<T> + ?Sized,
{
    let mut out = DenseMatrix::zeros(a.n_cols(), g.n_cols());
    spmm_transpose_into(a, g, &mut out.row_slices_mut())?;
    Ok(out)
}

/// Accumulates `Aᵀ · G` into `out`, one mutable slice per column of `A`.
pub fn spmm_transpose_into<T, G>(a: &CsrMatrix<T>, g: &G, out: &mut [&mut [T]]) -> Result<()>
where
    T: Real,
    G: Rows<T> + ?Sized,
{
    if a.n_rows() != g.n_rows() {
        return Err(Error::shape(
            "spmm_transpose",
            format!("{} upstream rows", a.n_rows()),
            g.n_rows(),
        ));
    }
    check_sink("spmm_transpose", a.n_cols(), g.n_cols(), out)?;
    let at = a.transpose();
    out.par_iter_mut().enumerate().for_each(|(k, orow)| {
        let (rows, vals) = at.row(k);
        for (&i, &v) in rows.iter().zip(vals) {
            for (o, &gv) in orow.iter_mut().zip(g.row(i)) {
                *o += v * gv;
            }
        }
    });
    Ok(())
}

/// Backward pass of `spmm(a, x, semiring)` for a product semiring,
/// accumulated into `out` (one slice per column of `A`).
///
/// Each stored entry receives `upstream ⊙ (product of the other entries in
/// its row)` through the semiring adjoint; entries are then summed per column.
pub fn spmm_product_backward_into<T, S, X, G>(
    a: &CsrMatrix<T>,
    x: &X,
    g: &G,
    semiring: &S,
    out: &mut [&mut [S::Elem]],
) -> Result<()>
where
    T: Real,
    S: ProductSemiring<T>,
    S::Elem: Zero + Add<Output = S::Elem>,
    X: Rows<S::Elem> + ?Sized,
    G: Rows<S::Elem> + ?Sized,
{
    check_backward_operands("spmm_product_backward", a, x.n_rows(), x.n_cols(), g)?;
    let d = x.n_cols();
    check_sink("spmm_product_backward", a.n_cols(), d, out)?;
    let entry_grads = per_entry(a, d, |i, (cols, vals), e, dst| {
        let grow = g.row(i);
        for (j, slot) in dst.iter_mut().enumerate() {
            let mut rest = semiring.add_identity();
            for (f, (&c, &v)) in cols.iter().zip(vals).enumerate() {
                if f != e {
                    rest = semiring.add(rest, semiring.mul(v, x.row(c)[j]));
                }
            }
            *slot = semiring.mul_adjoint(vals[e], grow[j], rest);
        }
    });
    scatter_entries(a, d, &entry_grads, out);
    Ok(())
}

/// Mixed multiply/subtract row kernel over complex values.
///
/// Row `i` evaluates `Π_{v>0} (v·x_k) + Σ_{v<0} (v·x_k)`; with markers `+1`
/// on `h` and `r` and `-1` on `t` that is `h ⊙ r − t`. A row without
/// positive markers has no product term.
pub fn spmm_rotate<T, X>(a: &CsrMatrix<T>, x: &X) -> Result<DenseMatrix<Complex<T>>>
where
    T: Real,
    X: Rows<Complex<T>> + ?Sized,
{
    if a.n_cols() != x.n_rows() {
        return Err(Error::shape("spmm_rotate", format!("{} dense rows", a.n_cols()), x.n_rows()));
    }
    let d = x.n_cols();
    let mut out = DenseMatrix::zeros(a.n_rows(), d);
    if d == 0 {
        return Ok(out);
    }
    out.data_mut()
        .par_chunks_mut(d)
        .enumerate()
        .for_each(|(i, orow)| {
            let (cols, vals) = a.row(i);
            for (j, o) in orow.iter_mut().enumerate() {
                let mut prod: Option<Complex<T>> = None;
                let mut sum = Complex::zero();
                for (&k, &v) in cols.iter().zip(vals) {
                    let term = x.row(k)[j] * v;
                    if v > T::zero() {
                        prod = Some(prod.map_or(term, |p| p * term));
                    } else {
                        sum += term;
                    }
                }
                *o = prod.unwrap_or_else(Complex::zero) + sum;
            }
        });
    Ok(out)
}

/// Backward pass of [`spmm_rotate`], accumulated into `out`.
pub fn spmm_rotate_backward_into<T, X, G>(
    a: &CsrMatrix<T>,
    x: &X,
    g: &G,
    out: &mut [&mut [Complex<T>]],
) -> Result<()>
where
    T: Real,
    X: Rows<Complex<T>> + ?Sized,
    G: Rows<Complex<T>> + ?Sized,
{
    check_backward_operands("spmm_rotate_backward", a, x.n_rows(), x.n_cols(), g)?;
    let d = x.n_cols();
    check_sink("spmm_rotate_backward", a.n_cols(), d, out)?;
    let entry_grads = per_entry(a, d, |i, (cols, vals), e, dst| {
        let grow = g.row(i);
        let v = vals[e];
        for (j, slot) in dst.iter_mut().enumerate() {
            if v > T::zero() {
                let mut rest = Complex::new(v, T::zero());
                for (f, (&c, &w)) in cols.iter().zip(vals).enumerate() {
                    if f != e && w > T::zero() {
                        rest *= x.row(c)[j] * w;
                    }
                }
                *slot = grow[j] * rest.conj();
            } else {
                *slot = grow[j] * v;
            }
        }
    });
    scatter_entries(a, d, &entry_grads, out);
    Ok(())
}

fn check_backward_operands<T: Real, S, G: Rows<S> + ?Sized>(
    op: &'static str,
    a: &CsrMatrix<T>,
    x_rows: usize,
    x_cols: usize,
    g: &G,
) -> Result<()> {
    if a.n_cols() != x_rows {
        return Err(Error::shape(op, format!("{} dense rows", a.n_cols()), x_rows));
    }
    if g.n_rows() != a.n_rows() || g.n_cols() != x_cols {
        return Err(Error::shape(
            op,
            format!("upstream {}x{}", a.n_rows(), x_cols),
            format!("{}x{}", g.n_rows(), g.n_cols()),
        ));
    }
    Ok(())
}

fn check_sink<S>(op: &'static str, rows: usize, cols: usize, out: &[&mut [S]]) -> Result<()> {
    if out.len() != rows {
        return Err(Error::shape(op, format!("{rows} output rows"), out.len()));
    }
    if let Some(bad) = out.iter().find(|r| r.len() != cols) {
        return Err(Error::shape(op, format!("output rows of width {cols}"), bad.len()));
    }
    Ok(())
}

/// Fills an `nnz × d` buffer, calling `f(row, (cols, vals), entry_in_row, dst)`
/// for every stored entry in parallel.
fn per_entry<T, E, F>(a: &CsrMatrix<T>, d: usize, f: F) -> Vec<E>
where
    T: Real,
    E: Copy + Zero + Send + Sync,
    F: Fn(usize, (&[usize], &[T]), usize, &mut [E]) + Sync,
{
    let mut buf = vec![E::zero(); a.nnz() * d];
    if d == 0 {
        return buf;
    }
    let mut entry_row = Vec::with_capacity(a.nnz());
    for i in 0..a.n_rows() {
        let len = a.row_ptr()[i + 1] - a.row_ptr()[i];
        entry_row.extend(std::iter::repeat_n(i, len));
    }
    buf.par_chunks_mut(d).enumerate().for_each(|(p, dst)| {
        let i = entry_row[p];
        f(i, a.row(i), p - a.row_ptr()[i], dst);
    });
    buf
}

/// `out[col] += Σ entry_grads[p]` over the entries `p` stored in `col`.
fn scatter_entries<T, E>(a: &CsrMatrix<T>, d: usize, entry_grads: &[E], out: &mut [&mut [E]])
where
    T: Real,
    E: Copy + Add<Output = E> + Send + Sync,
{
    let (at, perm) = a.transpose_with_permutation();
    out.par_iter_mut().enumerate().for_each(|(c, orow)| {
        for &p in &perm[at.row_ptr()[c]..at.row_ptr()[c + 1]] {
            for (o, &e) in orow.iter_mut().zip(&entry_grads[p * d..(p + 1) * d]) {
                *o = *o + e;
            }
        }
    });
}
