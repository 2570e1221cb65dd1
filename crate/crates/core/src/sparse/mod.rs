//! Sparse storage and the semiring SpMM kernel pair.

mod coo;
mod csr;
mod dense;
mod ops;
mod semiring;

pub use coo::CooMatrix;
pub use csr::CsrMatrix;
pub use dense::{
    as_complex, as_complex_mut, complex_row_slices_mut, stacked_row_slices_mut, ComplexRows,
    DenseMatrix, Rows, Stacked,
};
pub use ops::{
    spmm, spmm_into, spmm_product_backward_into, spmm_rotate, spmm_rotate_backward_into, spmm_transpose,
    spmm_transpose_into,
};
pub use semiring::{ComplexTimes, PlusTimes, ProductSemiring, Semiring, TimesTimes};
