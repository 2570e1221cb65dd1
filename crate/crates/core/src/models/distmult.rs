//! DistMult: `Σ_j h_j r_j t_j` via the times-times semiring.

use crate::error::Result;
use crate::incidence::{build_multiplicative, TripleBatch};
use crate::scalar::Real;
use crate::sparse::{spmm, spmm_product_backward_into, CsrMatrix, DenseMatrix, TimesTimes};
use crate::store::{EmbeddingStore, Gradients};

use super::{map_rows, Cache, ScoreBatch};

pub(super) fn forward<T: Real>(batch: &TripleBatch, store: &EmbeddingStore<T>) -> Result<ScoreBatch<T>> {
    let incidence = build_multiplicative::<T>(batch, false)?.to_csr();
    let products = spmm(&incidence, &store.stacked_view()?, &TimesTimes)?;
    let scores = map_rows(&products, |p| p.iter().copied().sum());
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
        g.row_mut(i).fill(u);
    }
    spmm_product_backward_into(incidence, &store.stacked_view()?, &g, &TimesTimes, &mut grads.stacked_sinks())
}
