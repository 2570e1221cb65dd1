//! RotatE: `Σ_j |h_j r_j − t_j|` via the mixed multiply/subtract row kernel.

use num_complex::Complex;

use crate::error::Result;
use crate::incidence::{build_multiplicative, TripleBatch};
use crate::scalar::Real;
use crate::sparse::{complex_row_slices_mut, spmm_rotate, spmm_rotate_backward_into, ComplexRows, CsrMatrix, DenseMatrix};
use crate::store::{EmbeddingStore, Gradients};

use super::distance::modulus;
use super::{build_rows, map_rows, Cache, ScoreBatch};

pub(super) fn forward<T: Real>(batch: &TripleBatch, store: &EmbeddingStore<T>) -> Result<ScoreBatch<T>> {
    // the -1 tail marker is the kernel's subtract marker
    let incidence = build_multiplicative::<T>(batch, true)?.to_csr();
    let stacked = store.stacked_view()?;
    let residual = spmm_rotate(&incidence, &ComplexRows::new(&stacked)?)?;
    let scores = map_rows(&residual, |q| q.iter().map(|&z| modulus(z)).sum());
    Ok(ScoreBatch::new(scores, Cache::Rotate { incidence, residual }))
}

pub(super) fn backward<T: Real>(
    incidence: &CsrMatrix<T>,
    residual: &DenseMatrix<Complex<T>>,
    upstream: &[T],
    store: &EmbeddingStore<T>,
    grads: &mut Gradients<T>,
) -> Result<()> {
    let g = build_rows(residual.rows(), residual.cols(), |i, out| {
        for (o, &z) in out.iter_mut().zip(residual.row(i)) {
            *o = z * (upstream[i] / modulus(z));
        }
    });
    let stacked = store.stacked_view()?;
    let mut sinks = complex_row_slices_mut(grads.stacked_sinks());
    spmm_rotate_backward_into(incidence, &ComplexRows::new(&stacked)?, &g, &mut sinks)
}
