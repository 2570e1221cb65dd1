//! ComplEx: `Re Σ_j h_j r_j conj(t_j)` via the complex product semiring.

use num_complex::Complex;

use crate::error::Result;
use crate::incidence::{build_multiplicative, TripleBatch};
use crate::scalar::Real;
use crate::sparse::{complex_row_slices_mut, spmm, spmm_product_backward_into, ComplexRows, ComplexTimes, CsrMatrix, DenseMatrix};
use crate::store::{EmbeddingStore, Gradients};

use super::{map_rows, Cache, ScoreBatch};

pub(super) fn forward<T: Real>(batch: &TripleBatch, store: &EmbeddingStore<T>) -> Result<ScoreBatch<T>> {
    let incidence = build_multiplicative::<T>(batch, true)?.to_csr();
    let stacked = store.stacked_view()?;
    let products = spmm(&incidence, &ComplexRows::new(&stacked)?, &ComplexTimes)?;
    let scores = map_rows(&products, |p| p.iter().map(|z| z.re).sum());
    Ok(ScoreBatch::new(scores, Cache::Product { incidence }))
}

pub(super) fn backward<T: Real>(
    incidence: &CsrMatrix<T>,
    upstream: &[T],
    store: &EmbeddingStore<T>,
    grads: &mut Gradients<T>,
) -> Result<()> {
    let d = store.entity_dim();
    let mut g = DenseMatrix::zeros(upstream.len(), d);
    for (i, &u) in upstream.iter().enumerate() {
        g.row_mut(i).fill(Complex::new(u, T::zero()));
    }
    let stacked = store.stacked_view()?;
    let mut sinks = complex_row_slices_mut(grads.stacked_sinks());
    spmm_product_backward_into(incidence, &ComplexRows::new(&stacked)?, &g, &ComplexTimes, &mut sinks)
}
