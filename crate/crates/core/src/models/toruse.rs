//! TorusE: wraparound distance of `h + r − t` on the `hrt` SpMM.

use crate::error::Result;
use crate::incidence::{build_hrt, TripleBatch};
use crate::scalar::Real;
use crate::sparse::{spmm, spmm_transpose_into, CsrMatrix, DenseMatrix, PlusTimes};
use crate::store::{EmbeddingStore, Gradients};

use super::distance::{torus_distance, torus_grad};
use super::{build_rows, map_rows, Cache, Norm, ScoreBatch};

pub(super) fn forward<T: Real>(norm_kind: Norm, batch: &TripleBatch, store: &EmbeddingStore<T>) -> Result<ScoreBatch<T>> {
    let incidence = build_hrt::<T>(batch).to_csr();
    let hrt = spmm(&incidence, &store.stacked_view()?, &PlusTimes)?;
    let scores = map_rows(&hrt, |v| torus_distance(v, norm_kind));
    Ok(ScoreBatch::new(scores, Cache::Hrt { incidence, hrt }))
}

pub(super) fn backward<T: Real>(
    norm_kind: Norm,
    incidence: &CsrMatrix<T>,
    hrt: &DenseMatrix<T>,
    upstream: &[T],
    grads: &mut Gradients<T>,
) -> Result<()> {
    let d = build_rows(hrt.rows(), hrt.cols(), |i, out| torus_grad(hrt.row(i), norm_kind, upstream[i], out));
    spmm_transpose_into(incidence, &d, &mut grads.stacked_sinks())
}
